use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-positive or non-finite price {value} on {date} for {label}")]
    NonPositivePrice {
        date: String,
        label: String,
        value: f64,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("column {0} has no observations")]
    EmptyColumn(String),

    #[error("panel is incomplete: {0}")]
    Incomplete(String),

    #[error("constant series, cannot fit bins (min = max = {value})")]
    DegenerateSeries { value: f64 },

    #[error("constant columns cannot be symbolized: {}", labels.join(", "))]
    DegenerateColumns { labels: Vec<String> },

    #[error("value {value} at index {index} lies outside [{min}, {max}]")]
    OutOfRange {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("length mismatch: {left} vs {right}")]
    Shape { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("pair {source_label} -> {target_label}: {inner}")]
    Pair {
        source_label: String,
        target_label: String,
        #[source]
        inner: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("no valid windows: {0}")]
    NoValidWindows(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
