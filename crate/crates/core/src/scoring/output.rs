//! Score files. Both formats carry the fingerprint and the full effective
//! configuration, so a file can be traced back to the run that produced it.
//!
//! CSV layout:
//!
//! ```text
//! # fingerprint=<16 hex chars>
//! # config=<effective configuration as one-line JSON>
//! topic_id,summary_id,system_id,status,relevance,redundancy,final,config_fingerprint,warnings
//! ```
//!
//! `status` is `ok` or `invalid`; invalid rows leave the numeric columns
//! empty and carry the reason in `warnings`. Multiple warnings are joined
//! with ` | `.

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BundleScores, EffectiveConfig, InvalidSummary, ScoreReport};

const HEADER: [&str; 9] = [
    "topic_id",
    "summary_id",
    "system_id",
    "status",
    "relevance",
    "redundancy",
    "final",
    "config_fingerprint",
    "warnings",
];
const WARNING_SEPARATOR: &str = " | ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScoresFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed score file: {0}")]
    Malformed(String),
}

impl BundleScores {
    pub fn write<W: Write>(&self, format: OutputFormat, w: W) -> Result<(), ScoresFileError> {
        match format {
            OutputFormat::Csv => self.write_csv(w),
            OutputFormat::Json => self.write_json(w),
        }
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), ScoresFileError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), ScoresFileError> {
        writeln!(w, "# fingerprint={}", self.fingerprint)?;
        writeln!(w, "# config={}", serde_json::to_string(&self.config)?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(HEADER)?;
        for row in self.rows() {
            match row {
                Ok(r) => out.write_record([
                    r.topic_id.as_str(),
                    &r.summary_id,
                    &r.system_id,
                    "ok",
                    &r.relevance.to_string(),
                    &r.redundancy.to_string(),
                    &r.final_score.to_string(),
                    &r.config_fingerprint,
                    &r.warnings.join(WARNING_SEPARATOR),
                ])?,
                Err(i) => out.write_record([
                    i.topic_id.as_str(),
                    &i.summary_id,
                    &i.system_id,
                    "invalid",
                    "",
                    "",
                    "",
                    &self.fingerprint,
                    &i.reason,
                ])?,
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_json(text: &str) -> Result<Self, ScoresFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_csv<R: BufRead>(mut reader: R) -> Result<Self, ScoresFileError> {
        let mut fingerprint = None;
        let mut config: Option<EffectiveConfig> = None;
        let mut rest = Vec::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if let Some(v) = trimmed.strip_prefix("# fingerprint=") {
                fingerprint = Some(v.to_string());
            } else if let Some(v) = trimmed.strip_prefix("# config=") {
                config = Some(serde_json::from_str(v)?);
            } else if !trimmed.starts_with('#') {
                rest.extend_from_slice(line.as_bytes());
                reader.read_to_end(&mut rest)?;
                break;
            }
        }
        let fingerprint =
            fingerprint.ok_or_else(|| ScoresFileError::Malformed("missing fingerprint".into()))?;
        let config = config.ok_or_else(|| ScoresFileError::Malformed("missing config".into()))?;

        let mut csv = csv::Reader::from_reader(&rest[..]);
        if csv.headers()?.iter().ne(HEADER) {
            return Err(ScoresFileError::Malformed("unexpected CSV header".into()));
        }
        let number = |field: &str| {
            field
                .parse::<f64>()
                .map_err(|_| ScoresFileError::Malformed(format!("bad number {field:?}")))
        };
        let mut reports = Vec::new();
        let mut invalid = Vec::new();
        for record in csv.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or_default().to_string();
            match &record[3] {
                "ok" => reports.push(ScoreReport {
                    topic_id: field(0),
                    summary_id: field(1),
                    system_id: field(2),
                    relevance: number(&record[4])?,
                    redundancy: number(&record[5])?,
                    final_score: number(&record[6])?,
                    config_fingerprint: field(7),
                    warnings: if record[8].is_empty() {
                        Vec::new()
                    } else {
                        record[8]
                            .split(WARNING_SEPARATOR)
                            .map(String::from)
                            .collect()
                    },
                }),
                "invalid" => invalid.push(InvalidSummary {
                    topic_id: field(0),
                    summary_id: field(1),
                    system_id: field(2),
                    reason: field(8),
                }),
                other => {
                    return Err(ScoresFileError::Malformed(format!(
                        "unknown status {other:?}"
                    )))
                }
            }
        }
        Ok(BundleScores {
            fingerprint,
            config,
            reports,
            invalid,
        })
    }
}
