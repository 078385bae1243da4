//! Run configuration: built-in defaults, overlaid by a TOML file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use pseudoref::centrality::PacSumParams;
use pseudoref::embedding_io::TokenFilter;
use pseudoref::relevance::FMode;
use pseudoref::{ConfigError, ScoreConfig, Scorer};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scoring: ScoringSection,
    #[serde(default)]
    pub relevance: RelevanceSection,
    #[serde(default)]
    pub pacsum: PacSumSection,
    #[serde(default)]
    pub pseudo_ref: PseudoRefSection,
    #[serde(default)]
    pub filter: FilterSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringSection {
    pub lambda: Option<f64>,
    pub redundancy: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceSection {
    pub f_mode: Option<FMode>,
    pub gamma: Option<u32>,
    pub centrality_weighting: Option<bool>,
    pub hybrid: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacSumSection {
    pub lambda_bwd: Option<f64>,
    pub lambda_fwd: Option<f64>,
    pub edge_threshold_beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoRefSection {
    pub top_m: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub stoplist: Option<PathBuf>,
    pub case_insensitive: Option<bool>,
    pub merge_subwords: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("config file not found: {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config file {}", path.display()))
    }
}

/// Overrides taken from the command line. `None` and `false` leave the
/// lower layers untouched.
#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub lambda: Option<f64>,
    pub f_mode: Option<FMode>,
    pub gamma: Option<u32>,
    pub top_m: Option<usize>,
    pub stoplist: Option<PathBuf>,
    pub no_centrality_weighting: bool,
    pub no_hybrid: bool,
    pub no_redundancy: bool,
}

/// Scoring configuration plus where the token filter comes from.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub score: ScoreConfig,
    pub stoplist: Option<PathBuf>,
    pub case_insensitive: bool,
    pub merge_subwords: bool,
}

pub fn resolve(file: &FileConfig, flags: &FlagOverrides) -> Resolved {
    let mut score = ScoreConfig::default();
    let defaults = PacSumParams::default();

    let s = &file.scoring;
    score.lambda = s.lambda.unwrap_or(score.lambda);
    score.redundancy_enabled = s.redundancy.unwrap_or(true);
    let r = &file.relevance;
    score.relevance.f_mode = r.f_mode.unwrap_or(score.relevance.f_mode);
    score.relevance.gamma = r.gamma.unwrap_or(score.relevance.gamma);
    score.relevance.centrality_weighting = r
        .centrality_weighting
        .unwrap_or(score.relevance.centrality_weighting);
    score.relevance.hybrid = r.hybrid.unwrap_or(score.relevance.hybrid);
    let p = &file.pacsum;
    score.pacsum = PacSumParams {
        lambda_bwd: p.lambda_bwd.unwrap_or(defaults.lambda_bwd),
        lambda_fwd: p.lambda_fwd.unwrap_or(defaults.lambda_fwd),
        edge_threshold_beta: p
            .edge_threshold_beta
            .unwrap_or(defaults.edge_threshold_beta),
    };
    score.top_m = file.pseudo_ref.top_m.unwrap_or(score.top_m);

    if let Some(v) = flags.lambda {
        score.lambda = v;
    }
    if let Some(v) = flags.f_mode {
        score.relevance.f_mode = v;
    }
    if let Some(v) = flags.gamma {
        score.relevance.gamma = v;
    }
    if let Some(v) = flags.top_m {
        score.top_m = v;
    }
    if flags.no_centrality_weighting {
        score.relevance.centrality_weighting = false;
    }
    if flags.no_hybrid {
        score.relevance.hybrid = false;
    }
    if flags.no_redundancy {
        score.redundancy_enabled = false;
    }

    Resolved {
        score,
        stoplist: flags
            .stoplist
            .clone()
            .or_else(|| file.filter.stoplist.clone()),
        case_insensitive: file.filter.case_insensitive.unwrap_or(true),
        merge_subwords: file.filter.merge_subwords.unwrap_or(false),
    }
}

impl Resolved {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.score.validate()
    }

    pub fn scorer(&self) -> Result<Scorer> {
        self.validate()?;
        let (filter, label) = match &self.stoplist {
            Some(path) => (
                TokenFilter::from_stoplist_file(path, self.case_insensitive)
                    .with_context(|| format!("cannot read stoplist {}", path.display()))?,
                path.display().to_string(),
            ),
            None => (
                TokenFilter::builtin(self.case_insensitive),
                "builtin:en".to_string(),
            ),
        };
        let filter = filter.with_subword_merging(self.merge_subwords);
        Ok(Scorer::with_stoplist_label(self.score, filter, label)?)
    }
}
