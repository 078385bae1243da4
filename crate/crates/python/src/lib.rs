//! Python bindings: bundle loading, the scorer, and the individual
//! operations (pooling, centrality, matching, correlations) as plain
//! functions over lists of floats.

use std::path::PathBuf;

use pyo3::exceptions::{PyFileNotFoundError, PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

use pseudoref::centrality::{self, PacSumParams};
use pseudoref::embedding_io::{self, BundleError, EmbeddingBundle, TokenFilter};
use pseudoref::meta_eval::{self, KendallVariant, Protocol, RatingsTable};
use pseudoref::relevance::{self, FMode, HybridRep, RelevanceConfig};
use pseudoref::scoring::{InvalidSummary, OutputFormat};
use pseudoref::{BundleScores, ScoreConfig, ScoreReport, Scorer};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bundle_error(e: BundleError) -> PyErr {
    match e {
        BundleError::NotFound(_) => PyFileNotFoundError::new_err(e.to_string()),
        BundleError::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rep(elements: Vec<Vec<f64>>) -> PyResult<HybridRep> {
    HybridRep::from_elements(elements).map_err(value_error)
}

/// A loaded embedding bundle.
#[pyclass(name = "Bundle", module = "pseudoref", frozen)]
pub struct PyBundle {
    inner: EmbeddingBundle,
}

#[pymethods]
impl PyBundle {
    /// Parses a JSON bundle held in a string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = embedding_io::read_bundle(text.as_bytes()).map_err(bundle_error)?;
        Ok(PyBundle { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        embedding_io::json::write(&self.inner, &mut buf).map_err(value_error)?;
        String::from_utf8(buf).map_err(value_error)
    }

    /// Writes the binary form (vectors narrowed to f32).
    fn save_binary(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyOSError::new_err(e.to_string()))?;
        embedding_io::binary::write(&self.inner, std::io::BufWriter::new(file))
            .map_err(|e| PyOSError::new_err(e.to_string()))
    }

    #[getter]
    fn encoder_id(&self) -> &str {
        &self.inner.encoder_id
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn topic_ids(&self) -> Vec<String> {
        self.inner
            .topics
            .iter()
            .map(|t| t.topic_id.clone())
            .collect()
    }

    #[getter]
    fn document_count(&self) -> usize {
        self.inner.document_count()
    }

    #[getter]
    fn summary_count(&self) -> usize {
        self.inner.summary_count()
    }

    /// Max-pooled sentence vectors of one document.
    fn document_sentence_vectors(
        &self,
        topic_id: &str,
        document: usize,
    ) -> PyResult<Vec<Vec<f64>>> {
        let topic = self
            .inner
            .topic(topic_id)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown topic {topic_id:?}")))?;
        let doc = topic.documents.get(document).ok_or_else(|| {
            PyKeyError::new_err(format!("no document {document} in {topic_id:?}"))
        })?;
        doc.sentence_vectors().map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.inner.topics.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Bundle(encoder_id={:?}, dim={}, topics={}, summaries={})",
            self.inner.encoder_id,
            self.inner.dim,
            self.inner.topics.len(),
            self.inner.summary_count()
        )
    }
}

#[pyfunction]
fn load_bundle(path: PathBuf) -> PyResult<PyBundle> {
    let inner = embedding_io::load_bundle(&path).map_err(bundle_error)?;
    Ok(PyBundle { inner })
}

#[pyclass(
    name = "ScoreReport",
    module = "pseudoref",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyScoreReport {
    topic_id: String,
    summary_id: String,
    system_id: String,
    relevance: f64,
    redundancy: f64,
    final_score: f64,
    config_fingerprint: String,
    warnings: Vec<String>,
}

impl From<&ScoreReport> for PyScoreReport {
    fn from(r: &ScoreReport) -> Self {
        PyScoreReport {
            topic_id: r.topic_id.clone(),
            summary_id: r.summary_id.clone(),
            system_id: r.system_id.clone(),
            relevance: r.relevance,
            redundancy: r.redundancy,
            final_score: r.final_score,
            config_fingerprint: r.config_fingerprint.clone(),
            warnings: r.warnings.clone(),
        }
    }
}

#[pymethods]
impl PyScoreReport {
    fn __repr__(&self) -> String {
        format!(
            "ScoreReport(topic_id={:?}, summary_id={:?}, final_score={})",
            self.topic_id, self.summary_id, self.final_score
        )
    }
}

/// Scores of a whole bundle plus the configuration that produced them.
#[pyclass(name = "BundleScores", module = "pseudoref", frozen)]
pub struct PyBundleScores {
    inner: BundleScores,
}

#[pymethods]
impl PyBundleScores {
    #[getter]
    fn fingerprint(&self) -> &str {
        &self.inner.fingerprint
    }

    #[getter]
    fn reports(&self) -> Vec<PyScoreReport> {
        self.inner.reports.iter().map(PyScoreReport::from).collect()
    }

    /// `(topic_id, summary_id, system_id, reason)` for each unscored summary.
    #[getter]
    fn invalid(&self) -> Vec<(String, String, String, String)> {
        self.inner
            .invalid
            .iter()
            .map(
                |InvalidSummary {
                     topic_id,
                     summary_id,
                     system_id,
                     reason,
                 }| {
                    (
                        topic_id.clone(),
                        summary_id.clone(),
                        system_id.clone(),
                        reason.clone(),
                    )
                },
            )
            .collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.render(OutputFormat::Csv)
    }

    fn to_json(&self) -> PyResult<String> {
        self.render(OutputFormat::Json)
    }

    /// Correlations of final scores with one rating dimension.
    /// Returns `(pearson, spearman, kendall)`, each `None` when undefined.
    #[pyo3(signature = (ratings_path, dimension, protocol = "topic", kendall = "tau-b"))]
    fn correlate(
        &self,
        ratings_path: PathBuf,
        dimension: &str,
        protocol: &str,
        kendall: &str,
    ) -> PyResult<(Option<f64>, Option<f64>, Option<f64>)> {
        let protocol = match protocol {
            "topic" => Protocol::PerTopicAverage,
            "pooled" => Protocol::Pooled,
            other => return Err(value_error(format!("unknown protocol {other:?}"))),
        };
        let ratings = RatingsTable::from_path(&ratings_path).map_err(value_error)?;
        let report = meta_eval::correlate(
            &self.inner.reports,
            &ratings,
            protocol,
            dimension,
            kendall_variant(kendall)?,
        )
        .map_err(value_error)?;
        Ok((report.pearson_r, report.spearman_rho, report.kendall_tau))
    }

    fn __len__(&self) -> usize {
        self.inner.reports.len()
    }
}

impl PyBundleScores {
    fn render(&self, format: OutputFormat) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write(format, &mut buf).map_err(value_error)?;
        String::from_utf8(buf).map_err(value_error)
    }
}

fn f_mode(name: &str) -> PyResult<FMode> {
    match name {
        "f1" => Ok(FMode::F1),
        "fbeta" => Ok(FMode::FBeta),
        other => Err(value_error(format!(
            "f_mode must be 'f1' or 'fbeta', got {other:?}"
        ))),
    }
}

fn kendall_variant(name: &str) -> PyResult<KendallVariant> {
    match name {
        "tau-b" => Ok(KendallVariant::TauB),
        "tau-a" => Ok(KendallVariant::TauA),
        other => Err(value_error(format!(
            "kendall must be 'tau-b' or 'tau-a', got {other:?}"
        ))),
    }
}

#[pyclass(name = "Scorer", module = "pseudoref", frozen)]
pub struct PyScorer {
    inner: Scorer,
}

#[pymethods]
impl PyScorer {
    #[new]
    #[pyo3(signature = (
        *,
        lambda_ = 0.6,
        f_mode = "f1",
        gamma = 2,
        top_m = 12,
        centrality_weighting = true,
        hybrid = true,
        redundancy = true,
        lambda_fwd = 1.0,
        lambda_bwd = 1.0,
        edge_threshold_beta = 0.0,
        stoplist = None,
        case_insensitive = true,
        merge_subwords = false,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        lambda_: f64,
        f_mode: &str,
        gamma: u32,
        top_m: usize,
        centrality_weighting: bool,
        hybrid: bool,
        redundancy: bool,
        lambda_fwd: f64,
        lambda_bwd: f64,
        edge_threshold_beta: f64,
        stoplist: Option<PathBuf>,
        case_insensitive: bool,
        merge_subwords: bool,
    ) -> PyResult<Self> {
        let config = ScoreConfig {
            lambda: lambda_,
            relevance: RelevanceConfig {
                f_mode: self::f_mode(f_mode)?,
                gamma,
                centrality_weighting,
                hybrid,
            },
            pacsum: PacSumParams {
                lambda_fwd,
                lambda_bwd,
                edge_threshold_beta,
            },
            top_m,
            redundancy_enabled: redundancy,
        };
        let (filter, label) = match stoplist {
            Some(path) => (
                TokenFilter::from_stoplist_file(&path, case_insensitive)
                    .map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?,
                path.display().to_string(),
            ),
            None => (
                TokenFilter::builtin(case_insensitive),
                "builtin:en".to_string(),
            ),
        };
        let inner =
            Scorer::with_stoplist_label(config, filter.with_subword_merging(merge_subwords), label)
                .map_err(value_error)?;
        Ok(PyScorer { inner })
    }

    #[getter]
    fn fingerprint(&self) -> &str {
        self.inner.fingerprint()
    }

    /// The effective configuration as canonical JSON.
    fn config_json(&self) -> PyResult<String> {
        serde_json::to_string(self.inner.effective_config()).map_err(value_error)
    }

    #[pyo3(signature = (bundle, jobs = 1))]
    fn score(&self, py: Python<'_>, bundle: &PyBundle, jobs: usize) -> PyResult<PyBundleScores> {
        let inner = py
            .detach(|| self.inner.evaluate_bundle_with_jobs(&bundle.inner, jobs))
            .map_err(value_error)?;
        Ok(PyBundleScores { inner })
    }

    fn score_summary(
        &self,
        bundle: &PyBundle,
        topic_id: &str,
        summary_id: &str,
    ) -> PyResult<PyScoreReport> {
        let topic = bundle
            .inner
            .topic(topic_id)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown topic {topic_id:?}")))?;
        let report = self
            .inner
            .evaluate_summary(topic, summary_id)
            .map_err(value_error)?;
        Ok(PyScoreReport::from(&report))
    }
}

#[pyfunction]
fn pool_sentence(token_vectors: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    embedding_io::pool_sentence(&token_vectors).map_err(value_error)
}

/// Indices of the tokens kept for matching.
#[pyfunction]
#[pyo3(signature = (tokens, stopwords = None, case_insensitive = true))]
fn filter_tokens(
    tokens: Vec<String>,
    stopwords: Option<Vec<String>>,
    case_insensitive: bool,
) -> Vec<usize> {
    let filter = match stopwords {
        Some(words) => TokenFilter::new(words, case_insensitive),
        None => TokenFilter::builtin(case_insensitive),
    };
    embedding_io::filter_tokens(&tokens, &filter)
}

#[pyfunction]
fn similarity_matrix(sentence_vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    centrality::similarity_matrix(&sentence_vectors)
}

#[pyfunction]
#[pyo3(signature = (similarity, lambda_fwd = 1.0, lambda_bwd = 1.0, edge_threshold_beta = 0.0))]
fn pacsum_centrality(
    similarity: Vec<Vec<f64>>,
    lambda_fwd: f64,
    lambda_bwd: f64,
    edge_threshold_beta: f64,
) -> PyResult<Vec<f64>> {
    let params = PacSumParams {
        lambda_fwd,
        lambda_bwd,
        edge_threshold_beta,
    };
    params.validate().map_err(value_error)?;
    if similarity.iter().any(|row| row.len() != similarity.len()) {
        return Err(value_error("similarity matrix must be square"));
    }
    Ok(centrality::pacsum_centrality(&similarity, &params))
}

/// Returns `(selected_indices, normalized_centrality)`.
#[pyfunction]
fn select_top_m(raw: Vec<f64>, m: usize) -> (Vec<usize>, Vec<f64>) {
    let s = centrality::select_top_m(&raw, m);
    (s.selected_indices, s.normalized_centrality)
}

/// Returns `(recall, precision)` of `summary` against a weighted reference.
#[pyfunction]
fn weighted_match(
    reference: Vec<Vec<f64>>,
    weights: Vec<f64>,
    summary: Vec<Vec<f64>>,
) -> PyResult<(f64, f64)> {
    relevance::weighted_match(&rep(reference)?, &weights, &rep(summary)?).map_err(value_error)
}

#[pyfunction]
fn beta_square(ref_size: usize, summ_size: usize, gamma: u32) -> PyResult<f64> {
    if ref_size == 0 || summ_size == 0 || gamma == 0 {
        return Err(value_error("sizes and gamma must be at least 1"));
    }
    Ok(relevance::beta_square(ref_size, summ_size, gamma))
}

#[pyfunction]
fn f_measure(recall: f64, precision: f64, beta_sq: f64) -> f64 {
    relevance::f_measure(recall, precision, beta_sq)
}

#[pyfunction]
fn redundancy_score(elements: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(pseudoref::redundancy::redundancy_score(&rep(elements)?))
}

#[pyfunction]
#[pyo3(name = "final_score")]
fn final_score_py(relevance: f64, redundancy: f64, lambda_: f64) -> PyResult<f64> {
    pseudoref::final_score(relevance, redundancy, lambda_).map_err(value_error)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    meta_eval::pearson(&x, &y).map_err(value_error)
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    meta_eval::spearman(&x, &y).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (x, y, variant = "tau-b"))]
fn kendall_tau(x: Vec<f64>, y: Vec<f64>, variant: &str) -> PyResult<f64> {
    meta_eval::kendall(&x, &y, kendall_variant(variant)?).map_err(value_error)
}

#[pymodule]
fn _pseudoref(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBundle>()?;
    m.add_class::<PyScorer>()?;
    m.add_class::<PyBundleScores>()?;
    m.add_class::<PyScoreReport>()?;
    m.add_function(wrap_pyfunction!(load_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(pool_sentence, m)?)?;
    m.add_function(wrap_pyfunction!(filter_tokens, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(pacsum_centrality, m)?)?;
    m.add_function(wrap_pyfunction!(select_top_m, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_match, m)?)?;
    m.add_function(wrap_pyfunction!(beta_square, m)?)?;
    m.add_function(wrap_pyfunction!(f_measure, m)?)?;
    m.add_function(wrap_pyfunction!(redundancy_score, m)?)?;
    m.add_function(wrap_pyfunction!(final_score_py, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau, m)?)?;
    Ok(())
}
