//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample {index}: value {value} on axis {axis} lies outside [{lo}, {hi}]")]
    OutOfRange {
        index: usize,
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("group {group} is empty")]
    EmptyGroup { group: usize },

    #[error("group {group} is degenerate: {reason}")]
    DegenerateGroup { group: usize, reason: String },

    #[error("unknown group {group}: map has {k} groups")]
    UnknownGroup { group: usize, k: usize },

    #[error("column `{0}` is not present in the dataset")]
    MissingColumn(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no feasible partition: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported schema version {found} (this build reads version {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors meaning "the requested search has no feasible
    /// solution", as opposed to malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
