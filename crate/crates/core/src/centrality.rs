//! Sentence centrality and pseudo-reference selection.
//!
//! Centrality is a directed degree over the sentence similarity graph.
//! Edges below a threshold placed between the smallest and largest
//! off-diagonal similarity are pruned, and similarities to preceding and
//! following sentences are weighted separately. The top-M sentences form the
//! pseudo reference; their scores are min-max normalised over the selection.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::similarity::{cosine_with_norms, norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacSumParams {
    /// Weight on similarities to following sentences.
    pub lambda_fwd: f64,
    /// Weight on similarities to preceding sentences.
    pub lambda_bwd: f64,
    /// Position of the pruning threshold between the minimum (0) and maximum
    /// off-diagonal similarity. Must lie in [0, 1).
    pub edge_threshold_beta: f64,
}

impl Default for PacSumParams {
    fn default() -> Self {
        PacSumParams {
            lambda_fwd: 1.0,
            lambda_bwd: 1.0,
            edge_threshold_beta: 0.0,
        }
    }
}

impl PacSumParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..1.0).contains(&self.edge_threshold_beta) {
            return Err(ConfigError::new(
                "pacsum.edge_threshold_beta",
                format!("must lie in [0, 1), got {}", self.edge_threshold_beta),
            ));
        }
        for (key, v) in [
            ("pacsum.lambda_fwd", self.lambda_fwd),
            ("pacsum.lambda_bwd", self.lambda_bwd),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::new(key, format!("must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoReferenceSelection {
    /// Selected sentence indices in document order.
    pub selected_indices: Vec<usize>,
    /// Normalised centrality of each selected sentence, in [0, 1].
    pub normalized_centrality: Vec<f64>,
}

impl PseudoReferenceSelection {
    pub fn len(&self) -> usize {
        self.selected_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected_indices.is_empty()
    }

    /// Content hash over indices and exact score bits.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::with_capacity(self.len() * 16);
        for (&i, &a) in self
            .selected_indices
            .iter()
            .zip(&self.normalized_centrality)
        {
            buf.extend_from_slice(&(i as u64).to_le_bytes());
            buf.extend_from_slice(&a.to_bits().to_le_bytes());
        }
        crate::fingerprint::sha256_hex(&buf)
    }
}

/// Pairwise cosine similarities. Symmetric; the diagonal is 1 for nonzero
/// vectors and 0 for zero vectors.
pub fn similarity_matrix(sentence_vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = sentence_vectors.len();
    let norms: Vec<f64> = sentence_vectors.iter().map(|v| norm(v)).collect();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        sim[i][i] = if norms[i] > 0.0 { 1.0 } else { 0.0 };
        for j in (i + 1)..n {
            let s = cosine_with_norms(
                &sentence_vectors[i],
                norms[i],
                &sentence_vectors[j],
                norms[j],
            );
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    sim
}

/// Raw centrality for every sentence of one document.
pub fn pacsum_centrality(sim: &[Vec<f64>], params: &PacSumParams) -> Vec<f64> {
    let n = sim.len();
    if n < 2 {
        return vec![0.0; n];
    }

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, row) in sim.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if i != j {
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    let threshold = lo + params.edge_threshold_beta * (hi - lo);
    let edge = |s: f64| if s >= threshold { s } else { 0.0 };

    sim.iter()
        .enumerate()
        .map(|(i, row)| {
            let backward: f64 = row[..i].iter().map(|&s| edge(s)).sum();
            let forward: f64 = row[i + 1..].iter().map(|&s| edge(s)).sum();
            params.lambda_bwd * backward + params.lambda_fwd * forward
        })
        .collect()
}

/// Picks the `m` most central sentences (ties go to the earlier sentence)
/// and min-max normalises their scores over the selection. When every
/// selected score is equal, each normalised score is 1.
pub fn select_top_m(raw: &[f64], m: usize) -> PseudoReferenceSelection {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    order.truncate(m);
    order.sort_unstable();

    let scores: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized_centrality = if hi > lo {
        scores.iter().map(|&c| (c - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; scores.len()]
    };

    PseudoReferenceSelection {
        selected_indices: order,
        normalized_centrality,
    }
}

/// Raw centralities and the top-`m` selection for one document's sentence vectors.
pub fn build_pseudo_reference(
    sentence_vectors: &[Vec<f64>],
    params: &PacSumParams,
    m: usize,
) -> (Vec<f64>, PseudoReferenceSelection) {
    let raw = pacsum_centrality(&similarity_matrix(sentence_vectors), params);
    let selection = select_top_m(&raw, m);
    (raw, selection)
}
