#![allow(dead_code)]

use pseudoref::embedding_io::{
    EmbeddingBundle, SentenceRecord, SummaryRecord, TextRecord, TopicRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

const WORDS: [&str; 14] = [
    "market", "the", "rally", ",", "storm", "of", "coast", "and", "vote", "council", ".", "river",
    "a", "flood",
];

fn random_text(rng: &mut impl Rng, dim: usize, sentences: usize) -> TextRecord {
    TextRecord {
        sentences: (0..sentences)
            .map(|_| {
                let n = rng.random_range(1..6);
                SentenceRecord {
                    tokens: (0..n)
                        .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
                        .collect(),
                    token_vectors: (0..n).map(|_| random_vector(rng, dim)).collect(),
                }
            })
            .collect(),
    }
}

/// Topics with 1-3 documents and 2-4 summaries from distinct systems.
pub fn random_bundle(seed: u64, topics: usize, dim: usize) -> EmbeddingBundle {
    let mut rng = rng(seed);
    let topics = (0..topics)
        .map(|t| {
            let n_docs = rng.random_range(1..4);
            let n_summ = rng.random_range(2..5);
            TopicRecord {
                topic_id: format!("topic{t:02}"),
                documents: (0..n_docs)
                    .map(|_| {
                        let n = rng.random_range(2..16);
                        random_text(&mut rng, dim, n)
                    })
                    .collect(),
                summaries: (0..n_summ)
                    .map(|s| {
                        let n = rng.random_range(1..4);
                        SummaryRecord {
                            summary_id: format!("topic{t:02}-sum{s}"),
                            system_id: format!("sys{s}"),
                            text: random_text(&mut rng, dim, n),
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    EmbeddingBundle {
        encoder_id: "random".into(),
        dim,
        metadata: Default::default(),
        topics,
    }
}

pub fn scale_bundle(bundle: &EmbeddingBundle, c: f64) -> EmbeddingBundle {
    let mut out = bundle.clone();
    let scale = |text: &mut TextRecord| {
        for s in &mut text.sentences {
            for v in &mut s.token_vectors {
                v.iter_mut().for_each(|x| *x *= c);
            }
        }
    };
    for topic in &mut out.topics {
        topic.documents.iter_mut().for_each(scale);
        topic.summaries.iter_mut().for_each(|s| scale(&mut s.text));
    }
    out
}

fn one_token(word: &str, v: [f64; 2]) -> TextRecord {
    TextRecord {
        sentences: vec![SentenceRecord {
            tokens: vec![word.into()],
            token_vectors: vec![v.to_vec()],
        }],
    }
}

/// A summary vector and the human rating of that summary.
pub type Rated = ([f64; 2], f64);

/// Per topic: the four rated summaries.
pub const PROTOCOL_TOPICS: [(&str, [Rated; 4]); 3] = [
    (
        "t1",
        [
            ([1.0, 0.0], 4.0),
            ([4.0, 3.0], 3.0),
            ([3.0, 4.0], 2.0),
            ([0.0, 1.0], 1.0),
        ],
    ),
    (
        "t2",
        [
            ([0.0, 1.0], 2.0),
            ([3.0, 4.0], 1.0),
            ([4.0, 3.0], 4.0),
            ([1.0, 0.0], 3.0),
        ],
    ),
    (
        "t3",
        [
            ([3.0, 4.0], 1.0),
            ([3.0, 4.0], 2.0),
            ([1.0, 0.0], 2.0),
            ([0.0, 1.0], 3.0),
        ],
    ),
];

/// Three topics, each with a one-sentence, one-token document along (1, 0)
/// and four one-token summaries from systems A-D.
///
/// Every pseudo reference is `[e1, e1]` with weights `[0.5, 0.5]` and every
/// summary representation is `[v, v]`, so relevance is `cos(v, e1)` (0, 0.6,
/// 0.8 or 1), redundancy is 1, and the default final score
/// `(cos - 0.6) / 1.6` is an increasing affine map of the cosine.
pub fn protocol_bundle() -> EmbeddingBundle {
    let topics = PROTOCOL_TOPICS
        .iter()
        .map(|(topic, rows)| TopicRecord {
            topic_id: topic.to_string(),
            documents: vec![one_token("harbour", [1.0, 0.0])],
            summaries: rows
                .iter()
                .zip(["A", "B", "C", "D"])
                .map(|((v, _), system)| SummaryRecord {
                    summary_id: format!("{topic}-{system}"),
                    system_id: system.to_string(),
                    text: one_token("ship", *v),
                })
                .collect(),
        })
        .collect();
    EmbeddingBundle {
        encoder_id: "toy".into(),
        dim: 2,
        metadata: Default::default(),
        topics,
    }
}

pub fn protocol_ratings_csv() -> String {
    let mut out = String::from("topic_id,summary_id,system_id,dimension,score\n");
    for (topic, rows) in PROTOCOL_TOPICS {
        for ((_, rating), system) in rows.iter().zip(["A", "B", "C", "D"]) {
            out.push_str(&format!(
                "{topic},{topic}-{system},{system},overall,{rating}\n"
            ));
        }
    }
    out
}

pub fn write_json_bundle(bundle: &EmbeddingBundle, path: &std::path::Path) {
    let file = std::fs::File::create(path).unwrap();
    pseudoref::embedding_io::json::write(bundle, std::io::BufWriter::new(file)).unwrap();
}

/// Runs the command line in-process, returning (status, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pseudoref").chain(args.iter().copied());
    let code = pseudoref_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}
