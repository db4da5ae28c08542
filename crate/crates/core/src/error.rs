use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DtbError>;

/// Failure categories surfaced by the library.
///
/// The CLI maps each variant family onto a process exit code, see
/// [`DtbError::exit_code`].
#[derive(Debug, Error)]
pub enum DtbError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("target column `{column}` not present in header {header:?}")]
    MissingColumn { column: String, header: Vec<String> },

    #[error("no usable rows in {}", .0.display())]
    NoUsableRows(PathBuf),

    #[error("dataset `{name}` is unreachable and not cached: {reason}")]
    Unreachable { name: String, reason: String },

    #[error("digest mismatch for `{name}`: expected {expected}, got {actual}")]
    DigestMismatch {
        name: String,
        expected: String,
        actual: String,
    },

    #[error("unknown dataset `{name}`; known datasets: {known}")]
    UnknownDataset { name: String, known: String },

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite prediction from model {model} on distribution {dist}")]
    NonFiniteLoss { model: usize, dist: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DtbError {
    pub fn config(msg: impl Into<String>) -> Self {
        DtbError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        DtbError::Data(msg.into())
    }

    /// Process exit code: 2 config validation, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            DtbError::Config(_) | DtbError::UnknownDataset { .. } => 2,
            DtbError::NonFiniteLoss { .. } | DtbError::Numeric(_) => 4,
            _ => 3,
        }
    }

    /// Short machine-readable tag for the error JSON emitted by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            DtbError::Config(_) => "config",
            DtbError::UnknownDataset { .. } => "unknown_dataset",
            DtbError::Data(_) => "data",
            DtbError::MissingFile(_) => "missing_file",
            DtbError::MissingColumn { .. } => "missing_column",
            DtbError::NoUsableRows(_) => "no_usable_rows",
            DtbError::Unreachable { .. } => "unreachable",
            DtbError::DigestMismatch { .. } => "digest_mismatch",
            DtbError::DimensionMismatch { .. } => "dimension_mismatch",
            DtbError::NonFiniteLoss { .. } => "non_finite_loss",
            DtbError::Numeric(_) => "numeric",
            DtbError::Io(_) => "io",
            DtbError::Csv(_) => "csv",
            DtbError::Json(_) => "json",
        }
    }
}
