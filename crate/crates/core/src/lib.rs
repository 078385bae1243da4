//! Training-free, reference-free summary evaluation.
//!
//! A summary is scored against the documents it summarises. Each document is
//! reduced to a pseudo reference of its most central sentences; relevance is
//! a centrality-weighted greedy matching between token- and sentence-level
//! vectors of the summary and each pseudo reference, and a self-masked
//! matching of the summary against itself penalises repetition.
//!
//! Modules follow the pipeline:
//!
//! * [`embedding_io`]: bundle format, sentence pooling, token filtering
//! * [`centrality`]: sentence centrality and top-M selection
//! * [`relevance`]: hybrid representations, weights, F1 / adaptive F-beta
//! * [`redundancy`]: self-masked redundancy
//! * [`scoring`]: the end-to-end per-summary pipeline and report files
//! * [`meta_eval`]: correlation with human ratings

pub mod centrality;
pub mod embedding_io;
mod error;
mod fingerprint;
pub mod meta_eval;
pub mod redundancy;
pub mod relevance;
pub mod scoring;
pub mod similarity;

pub use error::ConfigError;
pub use scoring::{final_score, BundleScores, ScoreConfig, ScoreReport, Scorer};
