//! Binary bundle encoding.
//!
//! ```text
//! PSEUDOREF-BUNDLE 1\n
//! encoder_id=<string>\n
//! dim=<usize>\n
//! topics=<usize>\n
//! documents=<usize>\n
//! summaries=<usize>\n
//! sentences=<usize>\n
//! <key>=<value>\n          (any number of extra metadata entries)
//! end\n
//! <payload>
//! ```
//!
//! Payload, all integers `u32` little-endian, strings as a `u32` byte length
//! followed by UTF-8 bytes, vector components as `f32` little-endian:
//!
//! ```text
//! per topic:    str topic_id, u32 n_documents, text*, u32 n_summaries,
//!               (str summary_id, str system_id, text)*
//! text:         u32 n_sentences, sentence*
//! sentence:     u32 n_tokens, str token * n_tokens, f32 * (n_tokens * dim)
//! ```
//!
//! The file must end exactly after the last topic.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use super::{BundleError, EmbeddingBundle, SentenceRecord, SummaryRecord, TextRecord, TopicRecord};

pub const MAGIC: &str = "PSEUDOREF-BUNDLE";
pub const VERSION: u32 = 1;

const RESERVED_KEYS: [&str; 6] = [
    "encoder_id",
    "dim",
    "topics",
    "documents",
    "summaries",
    "sentences",
];

struct Manifest {
    encoder_id: String,
    dim: usize,
    topics: usize,
    documents: usize,
    summaries: usize,
    sentences: usize,
    metadata: BTreeMap<String, String>,
}

fn read_manifest<R: BufRead>(reader: &mut R) -> Result<Manifest, BundleError> {
    let mut line = String::new();
    let next_line = |reader: &mut R, line: &mut String| -> Result<bool, BundleError> {
        line.clear();
        let n = reader.read_line(line)?;
        if line.ends_with('\n') {
            line.pop();
        }
        Ok(n > 0)
    };

    if !next_line(reader, &mut line)? {
        return Err(BundleError::parse("manifest", "empty file"));
    }
    let version = line
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| BundleError::parse("manifest", "missing magic line"))?;
    if version != VERSION.to_string() {
        return Err(BundleError::parse(
            "manifest",
            format!("unsupported bundle version {version:?}"),
        ));
    }

    let mut entries = BTreeMap::new();
    loop {
        if !next_line(reader, &mut line)? {
            return Err(BundleError::parse("manifest", "missing `end` line"));
        }
        if line == "end" {
            break;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            BundleError::parse(format!("manifest line {line:?}"), "expected key=value")
        })?;
        let key = key.trim().to_string();
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(BundleError::parse(
                format!("manifest key {key:?}"),
                "duplicate key",
            ));
        }
    }

    let mut take = |key: &str| {
        entries
            .remove(key)
            .ok_or_else(|| BundleError::parse(format!("manifest key {key:?}"), "missing"))
    };
    let encoder_id = take("encoder_id")?;
    let mut count = |key: &str| -> Result<usize, BundleError> {
        let raw = take(key)?;
        raw.parse().map_err(|_| {
            BundleError::parse(
                format!("manifest key {key:?}"),
                format!("{raw:?} is not a non-negative integer"),
            )
        })
    };
    let dim = count("dim")?;
    let topics = count("topics")?;
    let documents = count("documents")?;
    let summaries = count("summaries")?;
    let sentences = count("sentences")?;
    Ok(Manifest {
        encoder_id,
        dim,
        topics,
        documents,
        summaries,
        sentences,
        metadata: entries,
    })
}

struct PayloadReader<R> {
    inner: R,
    dim: usize,
}

impl<R: Read> PayloadReader<R> {
    fn exact<const N: usize>(&mut self, record: &str) -> Result<[u8; N], BundleError> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    BundleError::parse(record, "unexpected end of file")
                }
                _ => BundleError::Io(e),
            })?;
        Ok(buf)
    }

    fn u32(&mut self, record: &str) -> Result<usize, BundleError> {
        Ok(u32::from_le_bytes(self.exact::<4>(record)?) as usize)
    }

    fn string(&mut self, record: &str) -> Result<String, BundleError> {
        let len = self.u32(record)?;
        let mut bytes = Vec::new();
        (&mut self.inner).take(len as u64).read_to_end(&mut bytes)?;
        if bytes.len() != len {
            return Err(BundleError::parse(
                record,
                "unexpected end of file in string",
            ));
        }
        String::from_utf8(bytes).map_err(|_| BundleError::parse(record, "string is not UTF-8"))
    }

    fn text(&mut self, record: &str) -> Result<TextRecord, BundleError> {
        let n_sentences = self.u32(record)?;
        let mut sentences = Vec::with_capacity(n_sentences.min(1 << 16));
        for s in 0..n_sentences {
            let record = format!("{record}, sentence {s}");
            let n_tokens = self.u32(&record)?;
            let mut tokens = Vec::with_capacity(n_tokens.min(1 << 16));
            for _ in 0..n_tokens {
                tokens.push(self.string(&record)?);
            }
            let mut token_vectors = Vec::with_capacity(n_tokens.min(1 << 16));
            for _ in 0..n_tokens {
                let mut v = Vec::with_capacity(self.dim);
                for _ in 0..self.dim {
                    v.push(f32::from_le_bytes(self.exact::<4>(&record)?) as f64);
                }
                token_vectors.push(v);
            }
            sentences.push(SentenceRecord {
                tokens,
                token_vectors,
            });
        }
        Ok(TextRecord { sentences })
    }
}

/// Reads a binary bundle. Structural validation is left to the caller.
pub fn read<R: BufRead>(mut reader: R) -> Result<EmbeddingBundle, BundleError> {
    let manifest = read_manifest(&mut reader)?;
    let mut payload = PayloadReader {
        inner: reader,
        dim: manifest.dim,
    };

    let mut topics = Vec::with_capacity(manifest.topics.min(1 << 16));
    for t in 0..manifest.topics {
        let topic_id = payload.string(&format!("topic #{t}"))?;
        let record = format!("topic {topic_id:?}");
        let n_documents = payload.u32(&record)?;
        let mut documents = Vec::with_capacity(n_documents.min(1 << 16));
        for k in 0..n_documents {
            documents.push(payload.text(&format!("{record}, document {k}"))?);
        }
        let n_summaries = payload.u32(&record)?;
        let mut summaries = Vec::with_capacity(n_summaries.min(1 << 16));
        for i in 0..n_summaries {
            let summary_record = format!("{record}, summary #{i}");
            let summary_id = payload.string(&summary_record)?;
            let system_id = payload.string(&summary_record)?;
            let text = payload.text(&format!("{record}, summary {summary_id:?}"))?;
            summaries.push(SummaryRecord {
                summary_id,
                system_id,
                text,
            });
        }
        topics.push(TopicRecord {
            topic_id,
            documents,
            summaries,
        });
    }

    let mut trailing = [0u8; 1];
    if payload.inner.read(&mut trailing)? != 0 {
        return Err(BundleError::parse(
            "payload",
            "trailing bytes after last topic",
        ));
    }

    let bundle = EmbeddingBundle {
        encoder_id: manifest.encoder_id,
        dim: manifest.dim,
        metadata: manifest.metadata,
        topics,
    };
    for (key, declared, actual) in [
        ("documents", manifest.documents, bundle.document_count()),
        ("summaries", manifest.summaries, bundle.summary_count()),
        ("sentences", manifest.sentences, bundle.sentence_count()),
    ] {
        if declared != actual {
            return Err(BundleError::parse(
                format!("manifest key {key:?}"),
                format!("declares {declared} but payload holds {actual}"),
            ));
        }
    }
    Ok(bundle)
}

fn put_u32<W: Write>(w: &mut W, value: usize, what: &str) -> std::io::Result<()> {
    let value = u32::try_from(value).map_err(|_| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{what} {value} does not fit in u32"),
        )
    })?;
    w.write_all(&value.to_le_bytes())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    put_u32(w, s.len(), "string length")?;
    w.write_all(s.as_bytes())
}

fn put_text<W: Write>(w: &mut W, text: &TextRecord) -> std::io::Result<()> {
    put_u32(w, text.sentences.len(), "sentence count")?;
    for sentence in &text.sentences {
        put_u32(w, sentence.tokens.len(), "token count")?;
        for token in &sentence.tokens {
            put_str(w, token)?;
        }
        for v in &sentence.token_vectors {
            for &x in v {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Writes a bundle in the binary encoding. Components are narrowed to `f32`.
pub fn write<W: Write>(bundle: &EmbeddingBundle, mut w: W) -> std::io::Result<()> {
    let invalid = |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidInput, msg);
    if bundle.encoder_id.contains('\n') {
        return Err(invalid("encoder_id contains a newline".into()));
    }
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "encoder_id={}", bundle.encoder_id)?;
    writeln!(w, "dim={}", bundle.dim)?;
    writeln!(w, "topics={}", bundle.topics.len())?;
    writeln!(w, "documents={}", bundle.document_count())?;
    writeln!(w, "summaries={}", bundle.summary_count())?;
    writeln!(w, "sentences={}", bundle.sentence_count())?;
    for (key, value) in &bundle.metadata {
        if RESERVED_KEYS.contains(&key.as_str())
            || key == "end"
            || key.contains(['=', '\n'])
            || value.contains('\n')
        {
            return Err(invalid(format!("metadata key {key:?} cannot be written")));
        }
        writeln!(w, "{key}={value}")?;
    }
    writeln!(w, "end")?;

    for topic in &bundle.topics {
        put_str(&mut w, &topic.topic_id)?;
        put_u32(&mut w, topic.documents.len(), "document count")?;
        for doc in &topic.documents {
            put_text(&mut w, doc)?;
        }
        put_u32(&mut w, topic.summaries.len(), "summary count")?;
        for summary in &topic.summaries {
            put_str(&mut w, &summary.summary_id)?;
            put_str(&mut w, &summary.system_id)?;
            put_text(&mut w, &summary.text)?;
        }
    }
    w.flush()
}
