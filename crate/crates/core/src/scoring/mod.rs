//! Per-summary pipeline: pseudo references for every document of a topic,
//! averaged relevance, self-referenced redundancy, and their combination.

mod output;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{build_pseudo_reference, PacSumParams, PseudoReferenceSelection};
use crate::embedding_io::{EmbeddingBundle, PoolingError, SummaryRecord, TokenFilter, TopicRecord};
use crate::error::ConfigError;
use crate::redundancy::redundancy_score;
use crate::relevance::{
    assemble_hybrid, assemble_hybrid_subset, combine_weights, score_pair, CentralityWeights,
    HybridRep, RelevanceConfig, RelevanceError,
};

pub use output::{OutputFormat, ScoresFileError};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("summary {0:?} not found in topic")]
    UnknownSummary(String),
    #[error("summary has no sentences")]
    EmptySummary,
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Pooling(#[from] PoolingError),
    #[error("no document of the topic yields a usable pseudo reference")]
    NoUsableReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    /// Weight of the redundancy penalty, in (0, 1].
    pub lambda: f64,
    pub relevance: RelevanceConfig,
    pub pacsum: PacSumParams,
    /// Number of sentences kept in each pseudo reference.
    pub top_m: usize,
    pub redundancy_enabled: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            lambda: 0.6,
            relevance: RelevanceConfig::default(),
            pacsum: PacSumParams::default(),
            top_m: 12,
            redundancy_enabled: true,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_lambda(self.lambda)?;
        if self.top_m < 1 {
            return Err(ConfigError::new("pseudo_ref.top_m", "must be at least 1"));
        }
        self.relevance.validate()?;
        self.pacsum.validate()
    }
}

fn check_lambda(lambda: f64) -> Result<(), ConfigError> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(ConfigError::new(
            "lambda",
            format!("must lie in (0, 1], got {lambda}"),
        ))
    }
}

/// `(rel - lambda * red) / (1 + lambda)`.
pub fn final_score(rel: f64, red: f64, lambda: f64) -> Result<f64, ConfigError> {
    check_lambda(lambda)?;
    Ok((rel - lambda * red) / (1.0 + lambda))
}

/// Token-filter settings as recorded in output files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSettings {
    /// `builtin:en` or the stoplist path given on the command line.
    pub stoplist: String,
    pub stoplist_digest: String,
    pub case_insensitive: bool,
    pub merge_subwords: bool,
}

/// Everything that influences a score, embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub scoring: ScoreConfig,
    pub filter: FilterSettings,
}

impl EffectiveConfig {
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        crate::fingerprint::sha256_hex(canonical.as_bytes())[..16].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub topic_id: String,
    pub summary_id: String,
    pub system_id: String,
    pub relevance: f64,
    pub redundancy: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
    pub config_fingerprint: String,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// A summary that could not be scored; excluded from correlations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidSummary {
    pub topic_id: String,
    pub summary_id: String,
    pub system_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleScores {
    pub fingerprint: String,
    pub config: EffectiveConfig,
    pub reports: Vec<ScoreReport>,
    pub invalid: Vec<InvalidSummary>,
}

fn order_key<'a>(topic: &'a str, system: &'a str, summary: &'a str) -> (&'a str, &'a str, &'a str) {
    (topic, system, summary)
}

impl ScoreReport {
    fn key(&self) -> (&str, &str, &str) {
        order_key(&self.topic_id, &self.system_id, &self.summary_id)
    }
}

impl InvalidSummary {
    fn key(&self) -> (&str, &str, &str) {
        order_key(&self.topic_id, &self.system_id, &self.summary_id)
    }
}

/// One document's pseudo reference, ready to score any summary against.
#[derive(Debug, Clone)]
pub struct PreparedReference {
    pub document: usize,
    pub raw_centrality: Vec<f64>,
    pub selection: PseudoReferenceSelection,
    pub representation: HybridRep,
    pub weights: CentralityWeights,
}

/// Pseudo references of every usable document of one topic.
#[derive(Debug, Clone)]
pub struct PreparedTopic {
    pub topic_id: String,
    pub references: Vec<PreparedReference>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Scorer {
    config: ScoreConfig,
    filter: TokenFilter,
    effective: EffectiveConfig,
    fingerprint: String,
}

impl Scorer {
    pub fn new(config: ScoreConfig, filter: TokenFilter) -> Result<Self, ConfigError> {
        Scorer::with_stoplist_label(config, filter, "builtin:en")
    }

    /// Like [`Scorer::new`], recording where the stoplist came from.
    pub fn with_stoplist_label(
        config: ScoreConfig,
        filter: TokenFilter,
        stoplist: impl Into<String>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let effective = EffectiveConfig {
            scoring: config,
            filter: FilterSettings {
                stoplist: stoplist.into(),
                stoplist_digest: filter.digest(),
                case_insensitive: filter.case_insensitive(),
                merge_subwords: filter.merges_subwords(),
            },
        };
        let fingerprint = effective.fingerprint();
        Ok(Scorer {
            config,
            filter,
            effective,
            fingerprint,
        })
    }

    pub fn config(&self) -> &ScoreConfig {
        &self.config
    }

    pub fn filter(&self) -> &TokenFilter {
        &self.filter
    }

    pub fn effective_config(&self) -> &EffectiveConfig {
        &self.effective
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Builds the pseudo reference of every document once per topic.
    pub fn prepare_topic(&self, topic: &TopicRecord) -> Result<PreparedTopic, ScoringError> {
        let hybrid = self.config.relevance.hybrid;
        let mut references = Vec::with_capacity(topic.documents.len());
        let mut warnings = Vec::new();
        for (k, doc) in topic.documents.iter().enumerate() {
            let sentence_vectors = doc.sentence_vectors()?;
            let (raw_centrality, selection) =
                build_pseudo_reference(&sentence_vectors, &self.config.pacsum, self.config.top_m);
            let kept = doc.kept_tokens(&self.filter);
            let representation = match assemble_hybrid_subset(
                doc,
                &selection.selected_indices,
                &kept,
                &sentence_vectors,
                hybrid,
            ) {
                Ok(rep) => rep,
                Err(RelevanceError::DegenerateRepresentation) => {
                    warnings.push(format!(
                        "document {k}: pseudo reference has no kept tokens; document skipped"
                    ));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let weights = match combine_weights(
                &selection,
                &representation,
                self.config.relevance.centrality_weighting,
            ) {
                Ok(w) => w,
                Err(RelevanceError::ZeroWeightMass) => {
                    warnings.push(format!(
                        "document {k}: centrality weights of kept tokens sum to zero; using uniform weights"
                    ));
                    combine_weights(&selection, &representation, false)?
                }
                Err(e) => return Err(e.into()),
            };
            references.push(PreparedReference {
                document: k,
                raw_centrality,
                selection,
                representation,
                weights,
            });
        }
        if references.is_empty() {
            return Err(ScoringError::NoUsableReference);
        }
        Ok(PreparedTopic {
            topic_id: topic.topic_id.clone(),
            references,
            warnings,
        })
    }

    /// Hybrid representation of a summary under this scorer's settings.
    pub fn summary_representation(
        &self,
        summary: &SummaryRecord,
    ) -> Result<HybridRep, ScoringError> {
        let text = &summary.text;
        if text.sentences.is_empty() {
            return Err(ScoringError::EmptySummary);
        }
        let sentence_vectors = text.sentence_vectors()?;
        let kept = text.kept_tokens(&self.filter);
        Ok(assemble_hybrid(
            text,
            &kept,
            &sentence_vectors,
            self.config.relevance.hybrid,
        )?)
    }

    pub fn score_prepared(
        &self,
        prepared: &PreparedTopic,
        summary: &SummaryRecord,
    ) -> Result<ScoreReport, ScoringError> {
        let rep = self.summary_representation(summary)?;
        let mut warnings = prepared.warnings.clone();

        let mut total = 0.0;
        for reference in &prepared.references {
            total += score_pair(
                &reference.representation,
                &reference.weights,
                &rep,
                &self.config.relevance,
            )?
            .f;
        }
        let relevance = total / prepared.references.len() as f64;

        let redundancy = redundancy_score(&rep);
        if rep.len() < 2 {
            warnings.push("summary has fewer than two elements; redundancy set to 0".into());
        }
        let final_score = if self.config.redundancy_enabled {
            final_score(relevance, redundancy, self.config.lambda)
                .expect("lambda validated at construction")
        } else {
            relevance
        };

        Ok(ScoreReport {
            topic_id: prepared.topic_id.clone(),
            summary_id: summary.summary_id.clone(),
            system_id: summary.system_id.clone(),
            relevance,
            redundancy,
            final_score,
            config_fingerprint: self.fingerprint.clone(),
            warnings,
        })
    }

    pub fn evaluate_summary(
        &self,
        topic: &TopicRecord,
        summary_id: &str,
    ) -> Result<ScoreReport, ScoringError> {
        let summary = topic
            .summary(summary_id)
            .ok_or_else(|| ScoringError::UnknownSummary(summary_id.to_string()))?;
        let prepared = self.prepare_topic(topic)?;
        self.score_prepared(&prepared, summary)
    }

    fn evaluate_topic(&self, topic: &TopicRecord) -> (Vec<ScoreReport>, Vec<InvalidSummary>) {
        let invalid = |summary: &SummaryRecord, reason: String| InvalidSummary {
            topic_id: topic.topic_id.clone(),
            summary_id: summary.summary_id.clone(),
            system_id: summary.system_id.clone(),
            reason,
        };
        let prepared = match self.prepare_topic(topic) {
            Ok(p) => p,
            Err(e) => {
                let reason = e.to_string();
                return (
                    Vec::new(),
                    topic
                        .summaries
                        .iter()
                        .map(|s| invalid(s, reason.clone()))
                        .collect(),
                );
            }
        };
        let mut reports = Vec::new();
        let mut failures = Vec::new();
        for summary in &topic.summaries {
            match self.score_prepared(&prepared, summary) {
                Ok(r) => reports.push(r),
                Err(e) => failures.push(invalid(summary, e.to_string())),
            }
        }
        (reports, failures)
    }

    /// Scores every summary of every topic, in (topic, system, summary) order.
    pub fn evaluate_bundle(&self, bundle: &EmbeddingBundle) -> BundleScores {
        let per_topic: Vec<_> = bundle
            .topics
            .iter()
            .map(|t| self.evaluate_topic(t))
            .collect();
        self.merge(per_topic)
    }

    /// As [`Scorer::evaluate_bundle`], spreading topics over `jobs` threads.
    /// The result does not depend on `jobs`.
    pub fn evaluate_bundle_with_jobs(
        &self,
        bundle: &EmbeddingBundle,
        jobs: usize,
    ) -> Result<BundleScores, rayon::ThreadPoolBuildError> {
        if jobs <= 1 {
            return Ok(self.evaluate_bundle(bundle));
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        let per_topic: Vec<_> = pool.install(|| {
            bundle
                .topics
                .par_iter()
                .map(|t| self.evaluate_topic(t))
                .collect()
        });
        Ok(self.merge(per_topic))
    }

    fn merge(&self, per_topic: Vec<(Vec<ScoreReport>, Vec<InvalidSummary>)>) -> BundleScores {
        let mut reports = Vec::new();
        let mut invalid = Vec::new();
        for (r, i) in per_topic {
            reports.extend(r);
            invalid.extend(i);
        }
        reports.sort_by(|a, b| a.key().cmp(&b.key()));
        invalid.sort_by(|a, b| a.key().cmp(&b.key()));
        BundleScores {
            fingerprint: self.fingerprint.clone(),
            config: self.effective.clone(),
            reports,
            invalid,
        }
    }
}

impl BundleScores {
    /// Valid and invalid rows interleaved in report order.
    pub(crate) fn rows(&self) -> Vec<Result<&ScoreReport, &InvalidSummary>> {
        let mut rows: Vec<_> = self
            .reports
            .iter()
            .map(Ok)
            .chain(self.invalid.iter().map(Err))
            .collect();
        fn key<'a>(r: &Result<&'a ScoreReport, &'a InvalidSummary>) -> (&'a str, &'a str, &'a str) {
            match r {
                Ok(r) => r.key(),
                Err(i) => i.key(),
            }
        }
        rows.sort_by(|a, b| {
            key(a).cmp(&key(b)).then_with(|| match (a, b) {
                (Ok(_), Err(_)) => Ordering::Less,
                (Err(_), Ok(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            })
        });
        rows
    }
}
