//! Centrality-weighted relevance between a summary and pseudo references.
//!
//! Both sides are encoded as hybrid representations: kept token vectors
//! followed by sentence vectors. Pseudo-reference elements carry centrality
//! weights (tokens inherit the score of their sentence), and relevance is a
//! weighted greedy-matching recall/precision folded into F1 or an adaptive
//! F-beta whose beta grows with the reference/summary size ratio.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::PseudoReferenceSelection;
use crate::embedding_io::TextRecord;
use crate::error::ConfigError;
use crate::similarity::{cosine_with_norms, norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelevanceError {
    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("representation has no elements (no kept tokens and sentence vectors disabled)")]
    DegenerateRepresentation,
    #[error("{found} weights supplied for {expected} reference elements")]
    WeightLength { expected: usize, found: usize },
    #[error("centrality weights sum to zero")]
    ZeroWeightMass,
    #[error("representation does not match the selection: {0}")]
    SelectionMismatch(String),
    #[error("no pseudo references to score against")]
    NoReferences,
}

/// Which F-measure folds recall and precision into one relevance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FMode {
    #[default]
    F1,
    FBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    pub f_mode: FMode,
    /// Root applied to the size ratio in the adaptive beta. Must be >= 1.
    pub gamma: u32,
    pub centrality_weighting: bool,
    /// When false only token-level elements are used.
    pub hybrid: bool,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig {
            f_mode: FMode::F1,
            gamma: 2,
            centrality_weighting: true,
            hybrid: true,
        }
    }
}

impl RelevanceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.gamma < 1 {
            return Err(ConfigError::new("relevance.gamma", "must be at least 1"));
        }
        Ok(())
    }
}

/// Token vectors followed by sentence vectors for one text.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridRep {
    elements: Vec<Vec<f64>>,
    norms: Vec<f64>,
    n_tokens: usize,
    n_sentences: usize,
    token_sentence_index: Vec<usize>,
}

impl HybridRep {
    /// Builds a representation from already-selected parts.
    ///
    /// `token_sentence_index[j]` is the position (within the sentences that
    /// make up this text) of the sentence token `j` came from.
    pub fn from_parts(
        token_vectors: Vec<Vec<f64>>,
        token_sentence_index: Vec<usize>,
        sentence_vectors: Vec<Vec<f64>>,
    ) -> Result<Self, RelevanceError> {
        if token_vectors.len() != token_sentence_index.len() {
            return Err(RelevanceError::SelectionMismatch(format!(
                "{} token vectors but {} sentence indices",
                token_vectors.len(),
                token_sentence_index.len()
            )));
        }
        let n_tokens = token_vectors.len();
        let n_sentences = sentence_vectors.len();
        let mut elements = token_vectors;
        elements.extend(sentence_vectors);
        let Some(dim) = elements.first().map(Vec::len) else {
            return Err(RelevanceError::DegenerateRepresentation);
        };
        if let Some(bad) = elements.iter().find(|e| e.len() != dim) {
            return Err(RelevanceError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let norms = elements.iter().map(|e| norm(e)).collect();
        Ok(HybridRep {
            elements,
            norms,
            n_tokens,
            n_sentences,
            token_sentence_index,
        })
    }

    /// A representation made only of token-level elements, each its own sentence.
    pub fn from_elements(elements: Vec<Vec<f64>>) -> Result<Self, RelevanceError> {
        let index = (0..elements.len()).collect();
        HybridRep::from_parts(elements, index, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].len()
    }

    pub fn elements(&self) -> &[Vec<f64>] {
        &self.elements
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    pub fn n_sentences(&self) -> usize {
        self.n_sentences
    }

    pub fn token_sentence_index(&self) -> &[usize] {
        &self.token_sentence_index
    }

    /// Cosine similarity between element `i` of `self` and element `j` of `other`.
    pub fn similarity(&self, i: usize, other: &HybridRep, j: usize) -> f64 {
        cosine_with_norms(
            &self.elements[i],
            self.norms[i],
            &other.elements[j],
            other.norms[j],
        )
    }
}

/// Hybrid representation of a whole text.
pub fn assemble_hybrid(
    text: &TextRecord,
    kept: &[Vec<usize>],
    sentence_vectors: &[Vec<f64>],
    hybrid: bool,
) -> Result<HybridRep, RelevanceError> {
    let all: Vec<usize> = (0..text.sentences.len()).collect();
    assemble_hybrid_subset(text, &all, kept, sentence_vectors, hybrid)
}

/// Hybrid representation of the sentences `subset` (in the given order) of
/// `text`. `kept` and `sentence_vectors` are indexed by sentence of `text`.
pub fn assemble_hybrid_subset(
    text: &TextRecord,
    subset: &[usize],
    kept: &[Vec<usize>],
    sentence_vectors: &[Vec<f64>],
    hybrid: bool,
) -> Result<HybridRep, RelevanceError> {
    if kept.len() != text.sentences.len() || sentence_vectors.len() != text.sentences.len() {
        return Err(RelevanceError::SelectionMismatch(
            "kept-token and sentence-vector lists must align with the sentences".into(),
        ));
    }
    let mut tokens = Vec::new();
    let mut index = Vec::new();
    for (pos, &s) in subset.iter().enumerate() {
        let sentence = text.sentences.get(s).ok_or_else(|| {
            RelevanceError::SelectionMismatch(format!("sentence {s} out of range"))
        })?;
        for &t in &kept[s] {
            tokens.push(sentence.token_vectors[t].clone());
            index.push(pos);
        }
    }
    let sentences = if hybrid {
        subset
            .iter()
            .map(|&s| sentence_vectors[s].clone())
            .collect()
    } else {
        Vec::new()
    };
    HybridRep::from_parts(tokens, index, sentences)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityWeights {
    /// Normalised sentence centralities, one per selected sentence.
    pub sentence_weights_raw: Vec<f64>,
    /// Centrality inherited by each kept token from its sentence.
    pub token_weights_raw: Vec<f64>,
    /// Weights over the hybrid elements, summing to 1.
    pub combined: Vec<f64>,
}

impl CentralityWeights {
    pub fn uniform(len: usize) -> Self {
        CentralityWeights {
            sentence_weights_raw: Vec::new(),
            token_weights_raw: Vec::new(),
            combined: vec![1.0 / len as f64; len],
        }
    }
}

/// Weights for the elements of a pseudo-reference representation built from
/// exactly the sentences of `selection`, in the same order.
pub fn combine_weights(
    selection: &PseudoReferenceSelection,
    reference: &HybridRep,
    centrality_weighting: bool,
) -> Result<CentralityWeights, RelevanceError> {
    let m = selection.len();
    if reference.n_sentences != 0 && reference.n_sentences != m {
        return Err(RelevanceError::SelectionMismatch(format!(
            "{} sentence elements for {m} selected sentences",
            reference.n_sentences
        )));
    }
    let sentence_weights_raw = selection.normalized_centrality.clone();
    let token_weights_raw = reference
        .token_sentence_index
        .iter()
        .map(|&i| {
            sentence_weights_raw.get(i).copied().ok_or_else(|| {
                RelevanceError::SelectionMismatch(format!("token points at sentence {i} of {m}"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let len = reference.len();
    let combined = if centrality_weighting {
        let mut concat = token_weights_raw.clone();
        if reference.n_sentences > 0 {
            concat.extend_from_slice(&sentence_weights_raw);
        }
        let total: f64 = concat.iter().sum();
        if total <= 0.0 {
            return Err(RelevanceError::ZeroWeightMass);
        }
        concat.into_iter().map(|a| a / total).collect()
    } else {
        vec![1.0 / len as f64; len]
    };

    Ok(CentralityWeights {
        sentence_weights_raw,
        token_weights_raw,
        combined,
    })
}

/// Weighted greedy matching. Returns `(recall, precision)`: recall is the
/// weighted mean over reference elements of their best cosine against the
/// summary, precision the plain mean over summary elements of their best
/// cosine against the reference.
pub fn weighted_match(
    reference: &HybridRep,
    weights: &[f64],
    summary: &HybridRep,
) -> Result<(f64, f64), RelevanceError> {
    if reference.dim() != summary.dim() {
        return Err(RelevanceError::DimensionMismatch {
            expected: reference.dim(),
            found: summary.dim(),
        });
    }
    if weights.len() != reference.len() {
        return Err(RelevanceError::WeightLength {
            expected: reference.len(),
            found: weights.len(),
        });
    }
    let weight_total: f64 = weights.iter().sum();
    if weight_total == 0.0 {
        return Err(RelevanceError::ZeroWeightMass);
    }

    let mut col_best = vec![f64::NEG_INFINITY; summary.len()];
    let mut weighted_recall = 0.0;
    for (i, &a) in weights.iter().enumerate() {
        let mut row_best = f64::NEG_INFINITY;
        for (j, best) in col_best.iter_mut().enumerate() {
            let s = reference.similarity(i, summary, j);
            row_best = row_best.max(s);
            *best = best.max(s);
        }
        weighted_recall += a * row_best;
    }
    let recall = weighted_recall / weight_total;
    let precision = col_best.iter().sum::<f64>() / summary.len() as f64;
    Ok((recall, precision))
}

/// Squared beta of the adaptive F-measure: `(ref_size / summ_size)^(1/gamma)`
/// clamped to [1, 2]. Boundary cases are decided on the integer sizes so
/// they come out exact.
pub fn beta_square(ref_size: usize, summ_size: usize, gamma: u32) -> f64 {
    assert!(ref_size >= 1 && summ_size >= 1 && gamma >= 1);
    if ref_size <= summ_size {
        return 1.0;
    }
    let upper = (summ_size as u128).checked_mul(1u128.checked_shl(gamma).unwrap_or(0));
    if let Some(upper) = upper.filter(|&u| u > 0) {
        if ref_size as u128 >= upper {
            return 2.0;
        }
    }
    let ratio = ref_size as f64 / summ_size as f64;
    let root = match gamma {
        1 => ratio,
        2 => ratio.sqrt(),
        3 => ratio.cbrt(),
        g => ratio.powf(1.0 / g as f64),
    };
    root.clamp(1.0, 2.0)
}

/// F-measure with recall weighted by `beta_sq`; 0 when the denominator is 0.
pub fn f_measure(recall: f64, precision: f64, beta_sq: f64) -> f64 {
    let denominator = recall + beta_sq * precision;
    if denominator == 0.0 {
        return 0.0;
    }
    (1.0 + beta_sq) * recall * precision / denominator
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub recall: f64,
    pub precision: f64,
    pub beta_sq: f64,
    pub f: f64,
}

/// Relevance of `summary` against one pseudo reference.
pub fn score_pair(
    reference: &HybridRep,
    weights: &CentralityWeights,
    summary: &HybridRep,
    config: &RelevanceConfig,
) -> Result<PairScore, RelevanceError> {
    let (recall, precision) = weighted_match(reference, &weights.combined, summary)?;
    let beta_sq = match config.f_mode {
        FMode::F1 => 1.0,
        FMode::FBeta => beta_square(reference.len(), summary.len(), config.gamma),
    };
    Ok(PairScore {
        recall,
        precision,
        beta_sq,
        f: f_measure(recall, precision, beta_sq),
    })
}

/// Mean relevance over all pseudo references of a document set.
pub fn relevance_score(
    summary: &HybridRep,
    references: &[(HybridRep, CentralityWeights)],
    config: &RelevanceConfig,
) -> Result<f64, RelevanceError> {
    if references.is_empty() {
        return Err(RelevanceError::NoReferences);
    }
    let mut total = 0.0;
    for (reference, weights) in references {
        total += score_pair(reference, weights, summary, config)?.f;
    }
    Ok(total / references.len() as f64)
}
