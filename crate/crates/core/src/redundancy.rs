//! Self-referenced redundancy: how similar each summary element is to its
//! closest *other* element, averaged over the summary. Lower is better.

use crate::relevance::HybridRep;

/// Mean over elements of the best cosine against any other element.
/// Summaries with fewer than two elements score 0.
pub fn redundancy_score(summary: &HybridRep) -> f64 {
    let n = summary.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![f64::NEG_INFINITY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = summary.similarity(i, summary, j);
            best[i] = best[i].max(s);
            best[j] = best[j].max(s);
        }
    }
    best.iter().sum::<f64>() / n as f64
}
