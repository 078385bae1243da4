"""Reference-free summary scoring with centrality-weighted pseudo references."""

from ._pseudoref import (
    Bundle,
    BundleScores,
    ScoreReport,
    Scorer,
    beta_square,
    f_measure,
    filter_tokens,
    final_score,
    kendall_tau,
    load_bundle,
    pacsum_centrality,
    pearson,
    pool_sentence,
    redundancy_score,
    select_top_m,
    similarity_matrix,
    spearman,
    weighted_match,
)

__all__ = [
    "Bundle",
    "BundleScores",
    "ScoreReport",
    "Scorer",
    "beta_square",
    "f_measure",
    "filter_tokens",
    "final_score",
    "kendall_tau",
    "load_bundle",
    "pacsum_centrality",
    "pearson",
    "pool_sentence",
    "redundancy_score",
    "select_top_m",
    "similarity_matrix",
    "spearman",
    "weighted_match",
]
