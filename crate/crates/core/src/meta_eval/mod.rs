//! Agreement between metric scores and human ratings.
//!
//! Two protocols are supported. The per-topic protocol computes each
//! coefficient across the systems of one topic and averages over topics,
//! skipping topics where a coefficient is undefined. The pooled protocol
//! computes each coefficient once over every (topic, summary) pair.

mod correlation;
mod ratings;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{EffectiveConfig, ScoreReport};

pub use correlation::{
    average_ranks, kendall, kendall_tau_b, pearson, spearman, CorrelationError, KendallVariant,
};
pub use ratings::{RatingRecord, RatingsTable, RATINGS_HEADER};

#[derive(Debug, Error)]
pub enum MetaEvalError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("ratings file: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(
        "duplicate rating for topic {topic_id:?}, summary {summary_id:?}, dimension {dimension:?}"
    )]
    DuplicateRating {
        topic_id: String,
        summary_id: String,
        dimension: String,
    },
    #[error("no scored summary has a {dimension:?} rating")]
    EmptyJoin { dimension: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    PerTopicAverage,
    Pooled,
}

impl Protocol {
    pub fn label(&self) -> &'static str {
        match self {
            Protocol::PerTopicAverage => "topic",
            Protocol::Pooled => "pooled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub protocol: Protocol,
    pub dimension: String,
    pub kendall_variant: KendallVariant,
    /// `None` when undefined.
    pub pearson_r: Option<f64>,
    pub spearman_rho: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub n_topics_used: usize,
    pub n_pairs_used: usize,
    pub skipped_topics: Vec<String>,
}

impl CorrelationReport {
    pub fn is_defined(&self) -> bool {
        self.pearson_r.is_some()
    }
}

struct Coefficients {
    pearson: f64,
    spearman: f64,
    kendall: f64,
}

fn coefficients(
    pairs: &[(f64, f64)],
    variant: KendallVariant,
) -> Result<Coefficients, CorrelationError> {
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(Coefficients {
        pearson: pearson(&x, &y)?,
        spearman: spearman(&x, &y)?,
        kendall: kendall(&x, &y, variant)?,
    })
}

/// Correlates each report's final score with the human rating of
/// `dimension` for the same (topic, summary).
pub fn correlate(
    scores: &[ScoreReport],
    ratings: &RatingsTable,
    protocol: Protocol,
    dimension: &str,
    variant: KendallVariant,
) -> Result<CorrelationReport, MetaEvalError> {
    let mut by_topic: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for report in scores {
        if let Some(rating) = ratings.get(&report.topic_id, &report.summary_id, dimension) {
            by_topic
                .entry(report.topic_id.as_str())
                .or_default()
                .push((report.final_score, rating.score));
        }
    }
    if by_topic.is_empty() {
        return Err(MetaEvalError::EmptyJoin {
            dimension: dimension.to_string(),
        });
    }

    let mut report = CorrelationReport {
        protocol,
        dimension: dimension.to_string(),
        kendall_variant: variant,
        pearson_r: None,
        spearman_rho: None,
        kendall_tau: None,
        n_topics_used: 0,
        n_pairs_used: 0,
        skipped_topics: Vec::new(),
    };

    match protocol {
        Protocol::Pooled => {
            let pairs: Vec<(f64, f64)> = by_topic.values().flatten().copied().collect();
            report.n_topics_used = by_topic.len();
            report.n_pairs_used = pairs.len();
            if let Ok(c) = coefficients(&pairs, variant) {
                report.pearson_r = Some(c.pearson);
                report.spearman_rho = Some(c.spearman);
                report.kendall_tau = Some(c.kendall);
            }
        }
        Protocol::PerTopicAverage => {
            let (mut r, mut rho, mut tau) = (0.0, 0.0, 0.0);
            for (topic, pairs) in &by_topic {
                match coefficients(pairs, variant) {
                    Ok(c) => {
                        r += c.pearson;
                        rho += c.spearman;
                        tau += c.kendall;
                        report.n_topics_used += 1;
                        report.n_pairs_used += pairs.len();
                    }
                    Err(_) => report.skipped_topics.push(topic.to_string()),
                }
            }
            if report.n_topics_used > 0 {
                let n = report.n_topics_used as f64;
                report.pearson_r = Some(r / n);
                report.spearman_rho = Some(rho / n);
                report.kendall_tau = Some(tau / n);
            }
        }
    }
    Ok(report)
}

fn fmt_coefficient(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

/// Writes correlation reports as CSV, one row per (protocol, dimension),
/// preceded by the fingerprint and the configuration that produced the scores.
pub fn write_correlation_csv<W: Write>(
    reports: &[CorrelationReport],
    config: &EffectiveConfig,
    mut w: W,
) -> Result<(), MetaEvalError> {
    let canonical = serde_json::to_string(config).map_err(std::io::Error::other)?;
    writeln!(w, "# fingerprint={}", config.fingerprint())?;
    writeln!(w, "# config={canonical}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "protocol",
        "dimension",
        "pearson_r",
        "spearman_rho",
        "kendall_tau",
        "kendall_variant",
        "n_topics",
        "n_pairs",
        "skipped_topics",
    ])?;
    for r in reports {
        out.write_record([
            r.protocol.label(),
            &r.dimension,
            &fmt_coefficient(r.pearson_r),
            &fmt_coefficient(r.spearman_rho),
            &fmt_coefficient(r.kendall_tau),
            match r.kendall_variant {
                KendallVariant::TauB => "tau-b",
                KendallVariant::TauA => "tau-a",
            },
            &r.n_topics_used.to_string(),
            &r.n_pairs_used.to_string(),
            &r.skipped_topics.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}
