//! UAI model files and CSV result tables.

mod uai;

use serde::Serialize;
use thiserror::Error;

use crate::elimination::BoundResult;
use crate::model::{FactorId, ModelError};

pub use uai::{emit_uai, parse_uai};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: expected {expected}, found {token:?}")]
    Parse {
        line: usize,
        token: String,
        expected: &'static str,
    },
    #[error("unsupported UAI preamble {0:?} (only MARKOV models are read)")]
    UnsupportedPreamble(String),
    #[error("{0} has negative entries and cannot be written as UAI")]
    NegativeValues(FactorId),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("CSV output failed: {0}")]
    Csv(String),
}

/// One line of an experiment table.
///
/// `metric` is `log_bound - reference` and is present exactly when a
/// reference is; `metric_kind` says whether the reference is `ln Z` or the
/// MBE bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub model_id: String,
    pub method: String,
    pub ibound: usize,
    pub t: f64,
    pub seed: u64,
    pub direction: String,
    pub log_bound: Option<f64>,
    pub reference: Option<f64>,
    pub metric_kind: Option<String>,
    pub metric: Option<f64>,
    pub wall_time_s: f64,
    pub status: String,
}

impl ResultRow {
    /// Attaches a reference value and the derived metric.
    pub fn with_reference(mut self, kind: &str, reference: f64) -> Self {
        self.reference = Some(reference);
        self.metric_kind = Some(kind.to_string());
        self.metric = self.log_bound.map(|b| b - reference);
        self
    }
}

const HEADER: [&str; 12] = [
    "model_id",
    "method",
    "ibound",
    "t",
    "seed",
    "direction",
    "log_bound",
    "reference",
    "metric_kind",
    "metric",
    "wall_time_s",
    "status",
];

/// Header plus one RFC 4180 record per row.
pub fn emit_csv(rows: &[ResultRow]) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| IoError::Csv(e.to_string());
    w.write_record(HEADER).map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Csv(e.to_string()))
}

/// `iter,method,log_bound` rows of an optimizer trace.
pub fn emit_trace_csv(result: &BoundResult) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| IoError::Csv(e.to_string());
    w.write_record(["iter", "method", "log_bound"]).map_err(err)?;
    for (i, b) in result.trace.iter().enumerate() {
        w.write_record([i.to_string(), result.method.clone(), format!("{b:?}")])
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Csv(e.to_string()))
}
