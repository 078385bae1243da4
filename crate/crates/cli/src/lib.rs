//! The `pseudoref` command line: `score`, `benchmark` and `inspect`.
//!
//! [`run`] takes the argument list and output streams so the whole program
//! can be driven from tests. Every fatal error is reported on standard error
//! and mapped to exit status 2.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pseudoref::centrality::build_pseudo_reference;
use pseudoref::embedding_io::{load_bundle, EmbeddingBundle};
use pseudoref::meta_eval::{
    correlate, write_correlation_csv, KendallVariant, Protocol, RatingsTable,
};
use pseudoref::relevance::FMode;
use pseudoref::scoring::OutputFormat;
use pseudoref::{BundleScores, Scorer};

use config::{resolve, FileConfig, FlagOverrides, Resolved};

pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pseudoref",
    version,
    about = "Reference-free summary scoring with centrality-weighted pseudo references"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every summary of a bundle.
    Score(ScoreArgs),
    /// Score a bundle and correlate the scores with human ratings.
    Benchmark(BenchmarkArgs),
    /// Print the centrality and selection of one document's sentences.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FModeArg {
    F1,
    Fbeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Topic,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KendallArg {
    TauB,
    TauA,
}

/// Flags shared by every subcommand that builds a scorer.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Embedding bundle (binary or JSON).
    #[arg(long)]
    pub bundle: PathBuf,
    /// TOML configuration file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Redundancy weight, in (0, 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub f_mode: Option<FModeArg>,
    /// Root applied to the size ratio in the adaptive F-beta.
    #[arg(long)]
    pub gamma: Option<u32>,
    /// Sentences kept per pseudo reference.
    #[arg(long)]
    pub top_m: Option<usize>,
    /// Stop-word list, one word per line.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    /// Give every pseudo-reference element the same weight.
    #[arg(long)]
    pub no_centrality_weighting: bool,
    /// Use token vectors only, without sentence vectors.
    #[arg(long)]
    pub no_hybrid: bool,
    /// Report relevance alone as the final score.
    #[arg(long)]
    pub no_redundancy: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Human ratings CSV: topic_id,summary_id,system_id,dimension,score.
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long, value_enum, default_value = "topic")]
    pub protocol: ProtocolArg,
    /// Rating dimension to correlate with; repeatable. Defaults to all.
    #[arg(long = "dimension")]
    pub dimensions: Vec<String>,
    #[arg(long, value_enum, default_value = "tau-b")]
    pub kendall: KendallArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Also write the per-summary scores here (CSV).
    #[arg(long)]
    pub scores_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long)]
    pub topic: String,
    /// Document index within the topic.
    #[arg(long, default_value_t = 0)]
    pub document: usize,
}

impl ConfigArgs {
    fn overrides(&self) -> FlagOverrides {
        FlagOverrides {
            lambda: self.lambda,
            f_mode: self.f_mode.map(|m| match m {
                FModeArg::F1 => FMode::F1,
                FModeArg::Fbeta => FMode::FBeta,
            }),
            gamma: self.gamma,
            top_m: self.top_m,
            stoplist: self.stoplist.clone(),
            no_centrality_weighting: self.no_centrality_weighting,
            no_hybrid: self.no_hybrid,
            no_redundancy: self.no_redundancy,
        }
    }

    fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(resolve(&file, &self.overrides()))
    }

    /// Validates the configuration before touching the bundle, so a bad
    /// flag is reported even when the bundle is large.
    fn load(&self, stderr: &mut dyn Write) -> Result<(Scorer, EmbeddingBundle)> {
        let scorer = self.resolve()?.scorer()?;
        writeln!(stderr, "config fingerprint: {}", scorer.fingerprint())?;
        let bundle = load_bundle(&self.bundle)?;
        Ok((scorer, bundle))
    }
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Score(args) => cmd_score(args, stdout, stderr),
        Command::Benchmark(args) => cmd_benchmark(args, stdout, stderr),
        Command::Inspect(args) => cmd_inspect(args, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

fn with_output(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn evaluate(
    scorer: &Scorer,
    bundle: &EmbeddingBundle,
    jobs: usize,
    stderr: &mut dyn Write,
) -> Result<BundleScores> {
    let scores = scorer
        .evaluate_bundle_with_jobs(bundle, jobs.max(1))
        .map_err(|e| anyhow!("cannot start {jobs} worker threads: {e}"))?;
    for invalid in &scores.invalid {
        writeln!(
            stderr,
            "warning: topic {} summary {} not scored: {}",
            invalid.topic_id, invalid.summary_id, invalid.reason
        )?;
    }
    Ok(scores)
}

pub fn cmd_score(args: &ScoreArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let (scorer, bundle) = args.common.load(stderr)?;
    let scores = evaluate(&scorer, &bundle, args.jobs, stderr)?;
    with_output(args.out.as_deref(), stdout, |w| {
        Ok(scores.write(args.format.into(), w)?)
    })
}

pub fn cmd_benchmark(
    args: &BenchmarkArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let resolved = args.common.resolve()?;
    let scorer = resolved.scorer()?;
    let ratings = RatingsTable::from_path(&args.ratings)
        .with_context(|| format!("cannot load ratings {}", args.ratings.display()))?;
    writeln!(stderr, "config fingerprint: {}", scorer.fingerprint())?;
    let bundle = load_bundle(&args.common.bundle)?;
    let scores = evaluate(&scorer, &bundle, args.jobs, stderr)?;
    if let Some(path) = &args.scores_out {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        scores.write_csv(BufWriter::new(file))?;
    }

    let protocol = match args.protocol {
        ProtocolArg::Topic => Protocol::PerTopicAverage,
        ProtocolArg::Pooled => Protocol::Pooled,
    };
    let variant = match args.kendall {
        KendallArg::TauB => KendallVariant::TauB,
        KendallArg::TauA => KendallVariant::TauA,
    };
    let dimensions = if args.dimensions.is_empty() {
        ratings.dimensions()
    } else {
        args.dimensions.clone()
    };
    if dimensions.is_empty() {
        bail!("ratings file {} has no rows", args.ratings.display());
    }
    let mut reports = Vec::with_capacity(dimensions.len());
    for dimension in &dimensions {
        let report = correlate(&scores.reports, &ratings, protocol, dimension, variant)?;
        if !report.skipped_topics.is_empty() {
            writeln!(
                stderr,
                "warning: {dimension}: {} topic(s) skipped with undefined correlation",
                report.skipped_topics.len()
            )?;
        }
        reports.push(report);
    }

    with_output(args.out.as_deref(), stdout, |w| match args.format {
        FormatArg::Csv => Ok(write_correlation_csv(&reports, &scores.config, w)?),
        FormatArg::Json => {
            let doc = serde_json::json!({
                "fingerprint": scores.fingerprint,
                "config": scores.config,
                "correlations": reports,
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
            Ok(())
        }
    })
}

pub fn cmd_inspect(
    args: &InspectArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let (scorer, bundle) = args.common.load(stderr)?;
    let topic = bundle
        .topic(&args.topic)
        .ok_or_else(|| anyhow!("unknown topic {:?}", args.topic))?;
    let document = topic.documents.get(args.document).ok_or_else(|| {
        anyhow!(
            "topic {:?} has {} document(s), no index {}",
            args.topic,
            topic.documents.len(),
            args.document
        )
    })?;
    let vectors = document.sentence_vectors()?;
    let config = scorer.config();
    let (raw, selection) = build_pseudo_reference(&vectors, &config.pacsum, config.top_m);

    writeln!(
        stdout,
        "# topic={} document={} sentences={} top_m={}",
        args.topic,
        args.document,
        raw.len(),
        config.top_m
    )?;
    writeln!(
        stdout,
        "index\traw_centrality\tselected\tnormalized\tsentence"
    )?;
    for (i, sentence) in document.sentences.iter().enumerate() {
        let normalized = selection
            .selected_indices
            .iter()
            .position(|&s| s == i)
            .map(|p| selection.normalized_centrality[p]);
        writeln!(
            stdout,
            "{i}\t{}\t{}\t{}\t{}",
            raw[i],
            u8::from(normalized.is_some()),
            normalized.map_or_else(|| "-".to_string(), |v| v.to_string()),
            sentence.tokens.join(" ")
        )?;
    }
    Ok(())
}
