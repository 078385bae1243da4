use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetaEvalError;

pub const RATINGS_HEADER: [&str; 5] = ["topic_id", "summary_id", "system_id", "dimension", "score"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub topic_id: String,
    pub summary_id: String,
    pub system_id: String,
    pub dimension: String,
    pub score: f64,
}

/// Human ratings keyed by (topic, summary, dimension).
#[derive(Debug, Clone, Default)]
pub struct RatingsTable {
    records: Vec<RatingRecord>,
    index: HashMap<(String, String, String), usize>,
}

impl RatingsTable {
    pub fn new(records: Vec<RatingRecord>) -> Result<Self, MetaEvalError> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            let key = (
                r.topic_id.clone(),
                r.summary_id.clone(),
                r.dimension.clone(),
            );
            if index.insert(key, i).is_some() {
                return Err(MetaEvalError::DuplicateRating {
                    topic_id: r.topic_id.clone(),
                    summary_id: r.summary_id.clone(),
                    dimension: r.dimension.clone(),
                });
            }
            if !r.score.is_finite() {
                return Err(MetaEvalError::Schema(format!(
                    "non-finite score for topic {:?}, summary {:?}",
                    r.topic_id, r.summary_id
                )));
            }
        }
        Ok(RatingsTable { records, index })
    }

    /// Reads the CSV form: header `topic_id,summary_id,system_id,dimension,score`
    /// (columns in any order, extra columns ignored).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, MetaEvalError> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv.headers()?.clone();
        for column in RATINGS_HEADER {
            if !headers.iter().any(|h| h == column) {
                return Err(MetaEvalError::Schema(format!(
                    "ratings file is missing column {column:?}"
                )));
            }
        }
        let records = csv
            .deserialize::<RatingRecord>()
            .collect::<Result<Vec<_>, _>>()?;
        RatingsTable::new(records)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, MetaEvalError> {
        let file = std::fs::File::open(path.as_ref())?;
        RatingsTable::from_csv(std::io::BufReader::new(file))
    }

    pub fn records(&self) -> &[RatingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, topic_id: &str, summary_id: &str, dimension: &str) -> Option<&RatingRecord> {
        self.index
            .get(&(
                topic_id.to_string(),
                summary_id.to_string(),
                dimension.to_string(),
            ))
            .map(|&i| &self.records[i])
    }

    /// Distinct dimensions in sorted order.
    pub fn dimensions(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.dimension.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}
