//! All-text bundle encoding, one JSON document:
//!
//! ```json
//! {
//!   "encoder_id": "toy", "dim": 2,
//!   "metadata": {"splitter": "punkt"},
//!   "topics": [{
//!     "topic_id": "t1",
//!     "documents": [{"sentences": [{"tokens": ["a"], "token_vectors": [[1, 0]]}]}],
//!     "summaries": [{"summary_id": "s1", "system_id": "A",
//!                    "sentences": [{"tokens": ["b"], "token_vectors": [[0, 1]]}]}]
//!   }]
//! }
//! ```

use std::io::Write;

use super::{BundleError, EmbeddingBundle};

pub fn from_str(text: &str) -> Result<EmbeddingBundle, BundleError> {
    serde_json::from_str(text).map_err(|e| {
        BundleError::parse(
            format!("JSON bundle at line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub fn write<W: Write>(bundle: &EmbeddingBundle, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, bundle)?;
    w.flush()
}
