//! Embedding bundles: the token vectors, token strings and sentence
//! structure of every document and summary in a corpus, grouped by topic.
//!
//! Two on-disk encodings are accepted by [`load_bundle`]:
//!
//! * a binary file with a short text manifest followed by little-endian
//!   records (see [`binary`]), used for real corpora;
//! * a single JSON document (see [`json`]), used for hand-written fixtures.
//!
//! Sentence vectors are never stored. They are recomputed from the token
//! vectors by [`pool_sentence`].

pub mod binary;
mod filter;
pub mod json;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{filter_tokens, TokenFilter, DEFAULT_STOPWORDS};

/// A dense vector as held in memory.
pub type Vector = Vec<f64>;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("i/o error reading bundle: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error in {record}: {message}")]
    Parse { record: String, message: String },
    #[error("dimension mismatch at {location}: expected {expected} components, found {found}")]
    DimensionMismatch {
        location: Location,
        expected: usize,
        found: usize,
    },
    #[error("structural error in {record}: {message}")]
    Structure { record: String, message: String },
}

impl BundleError {
    pub(crate) fn parse(record: impl Into<String>, message: impl Into<String>) -> Self {
        BundleError::Parse {
            record: record.into(),
            message: message.into(),
        }
    }

    pub(crate) fn structure(record: impl Into<String>, message: impl Into<String>) -> Self {
        BundleError::Structure {
            record: record.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PoolingError {
    #[error("cannot pool an empty token list")]
    Empty,
    #[error("token {index} has {found} components, expected {expected}")]
    RaggedInput {
        index: usize,
        expected: usize,
        found: usize,
    },
}

/// Which text inside a topic a record belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextKind {
    Document(usize),
    Summary(String),
}

/// Coordinates of a token inside a bundle, used in error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub topic_id: String,
    pub text: TextKind,
    pub sentence: usize,
    pub token: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "topic {:?}, ", self.topic_id)?;
        match &self.text {
            TextKind::Document(k) => write!(f, "document {k}")?,
            TextKind::Summary(id) => write!(f, "summary {id:?}")?,
        }
        write!(f, ", sentence {}, token {}", self.sentence, self.token)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub tokens: Vec<String>,
    pub token_vectors: Vec<Vector>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TextRecord {
    pub sentences: Vec<SentenceRecord>,
}

impl TextRecord {
    /// Max-pooled vector for every sentence, in order.
    pub fn sentence_vectors(&self) -> Result<Vec<Vector>, PoolingError> {
        self.sentences
            .iter()
            .map(|s| pool_sentence(&s.token_vectors))
            .collect()
    }

    /// Kept token indices for every sentence, in order.
    pub fn kept_tokens(&self, filter: &TokenFilter) -> Vec<Vec<usize>> {
        self.sentences
            .iter()
            .map(|s| filter_tokens(&s.tokens, filter))
            .collect()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub summary_id: String,
    pub system_id: String,
    #[serde(flatten)]
    pub text: TextRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub topic_id: String,
    pub documents: Vec<TextRecord>,
    pub summaries: Vec<SummaryRecord>,
}

impl TopicRecord {
    pub fn summary(&self, summary_id: &str) -> Option<&SummaryRecord> {
        self.summaries.iter().find(|s| s.summary_id == summary_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBundle {
    pub encoder_id: String,
    pub dim: usize,
    /// Free-form provenance entries from the manifest (splitter name, etc.).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub topics: Vec<TopicRecord>,
}

impl EmbeddingBundle {
    pub fn topic(&self, topic_id: &str) -> Option<&TopicRecord> {
        self.topics.iter().find(|t| t.topic_id == topic_id)
    }

    pub fn document_count(&self) -> usize {
        self.topics.iter().map(|t| t.documents.len()).sum()
    }

    pub fn summary_count(&self) -> usize {
        self.topics.iter().map(|t| t.summaries.len()).sum()
    }

    pub fn sentence_count(&self) -> usize {
        self.topics
            .iter()
            .flat_map(|t| {
                t.documents
                    .iter()
                    .chain(t.summaries.iter().map(|s| &s.text))
            })
            .map(|text| text.sentences.len())
            .sum()
    }

    /// Checks every structural invariant of the bundle.
    ///
    /// Documents must contain at least one sentence. A summary with no
    /// sentences is accepted here; scoring reports it as invalid so the rest
    /// of the batch is still evaluated.
    pub fn validate(&self) -> Result<(), BundleError> {
        if self.dim == 0 {
            return Err(BundleError::structure("manifest", "dim must be at least 1"));
        }
        if self.topics.is_empty() {
            return Err(BundleError::structure("manifest", "bundle has no topics"));
        }
        let mut topic_ids = HashSet::new();
        for topic in &self.topics {
            let record = format!("topic {:?}", topic.topic_id);
            if !topic_ids.insert(topic.topic_id.as_str()) {
                return Err(BundleError::structure(record, "duplicate topic id"));
            }
            if topic.documents.is_empty() {
                return Err(BundleError::structure(record, "topic has no documents"));
            }
            if topic.summaries.is_empty() {
                return Err(BundleError::structure(record, "topic has no summaries"));
            }
            for (k, doc) in topic.documents.iter().enumerate() {
                if doc.sentences.is_empty() {
                    return Err(BundleError::structure(
                        format!("{record}, document {k}"),
                        "document has no sentences",
                    ));
                }
                self.validate_text(topic, TextKind::Document(k), doc)?;
            }
            let mut summary_ids = HashSet::new();
            for summary in &topic.summaries {
                if !summary_ids.insert(summary.summary_id.as_str()) {
                    return Err(BundleError::structure(
                        format!("{record}, summary {:?}", summary.summary_id),
                        "duplicate summary id",
                    ));
                }
                self.validate_text(
                    topic,
                    TextKind::Summary(summary.summary_id.clone()),
                    &summary.text,
                )?;
            }
        }
        Ok(())
    }

    fn validate_text(
        &self,
        topic: &TopicRecord,
        kind: TextKind,
        text: &TextRecord,
    ) -> Result<(), BundleError> {
        for (s, sentence) in text.sentences.iter().enumerate() {
            let location = |token| Location {
                topic_id: topic.topic_id.clone(),
                text: kind.clone(),
                sentence: s,
                token,
            };
            if sentence.tokens.is_empty() {
                return Err(BundleError::structure(
                    location(0).to_string(),
                    "sentence has no tokens",
                ));
            }
            if sentence.tokens.len() != sentence.token_vectors.len() {
                return Err(BundleError::structure(
                    location(0).to_string(),
                    format!(
                        "{} tokens but {} token vectors",
                        sentence.tokens.len(),
                        sentence.token_vectors.len()
                    ),
                ));
            }
            for (t, v) in sentence.token_vectors.iter().enumerate() {
                if v.len() != self.dim {
                    return Err(BundleError::DimensionMismatch {
                        location: location(t),
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(BundleError::structure(
                        location(t).to_string(),
                        "vector contains a non-finite component",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Loads and validates a bundle, detecting the encoding from its first bytes.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<EmbeddingBundle, BundleError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => BundleError::NotFound(path.to_path_buf()),
        _ => BundleError::Io(e),
    })?;
    read_bundle(BufReader::new(file))
}

/// Reads and validates a bundle from any buffered reader.
pub fn read_bundle<R: BufRead>(mut reader: R) -> Result<EmbeddingBundle, BundleError> {
    let head = reader.fill_buf()?;
    let bundle = if head.starts_with(binary::MAGIC.as_bytes()) {
        binary::read(reader)?
    } else {
        let first = head.iter().find(|b| !b.is_ascii_whitespace());
        if first != Some(&b'{') {
            return Err(BundleError::parse(
                "header",
                "neither a binary bundle manifest nor a JSON document",
            ));
        }
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        json::from_str(&text)?
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Component-wise maximum over all token vectors of a sentence.
pub fn pool_sentence(token_vectors: &[Vector]) -> Result<Vector, PoolingError> {
    let (first, rest) = token_vectors.split_first().ok_or(PoolingError::Empty)?;
    let mut pooled = first.clone();
    for (i, v) in rest.iter().enumerate() {
        if v.len() != pooled.len() {
            return Err(PoolingError::RaggedInput {
                index: i + 1,
                expected: pooled.len(),
                found: v.len(),
            });
        }
        for (p, &x) in pooled.iter_mut().zip(v) {
            if x > *p {
                *p = x;
            }
        }
    }
    Ok(pooled)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn sentence(tokens: &[&str], vectors: &[&[f64]]) -> SentenceRecord {
        SentenceRecord {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            token_vectors: vectors.iter().map(|v| v.to_vec()).collect(),
        }
    }

    /// One topic, one two-sentence document, one summary, dim 4.
    pub fn minimal_bundle() -> EmbeddingBundle {
        let doc = TextRecord {
            sentences: vec![
                sentence(
                    &["the", "cat", "sat"],
                    &[
                        &[0.1, 0.2, 0.3, 0.4],
                        &[1.0, 0.0, 0.5, -0.5],
                        &[0.3, 0.9, -0.1, 0.0],
                    ],
                ),
                sentence(
                    &["dogs", "bark"],
                    &[&[0.0, 1.0, 0.0, 0.2], &[0.5, 0.5, 0.5, 0.5]],
                ),
            ],
        };
        let summary = SummaryRecord {
            summary_id: "s1".into(),
            system_id: "sysA".into(),
            text: TextRecord {
                sentences: vec![sentence(
                    &["a", "cat", "barks"],
                    &[
                        &[0.2, 0.1, 0.0, 0.0],
                        &[0.9, 0.1, 0.4, -0.4],
                        &[0.4, 0.6, 0.4, 0.6],
                    ],
                )],
            },
        };
        EmbeddingBundle {
            encoder_id: "test-encoder".into(),
            dim: 4,
            metadata: BTreeMap::new(),
            topics: vec![TopicRecord {
                topic_id: "t1".into(),
                documents: vec![doc],
                summaries: vec![summary],
            }],
        }
    }
}
