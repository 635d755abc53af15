//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or invalid arguments.
    Config,
    /// Bad or missing data (files, parse failures, shape mismatches).
    Data,
    /// Training failed to produce a usable model.
    Training,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("data must be non-empty, got shape {n}x{d}")]
    EmptyData { n: usize, d: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label {label} out of range for {q} groups")]
    LabelOutOfRange { label: usize, q: usize },

    #[error("weights must be strictly positive and finite (weight {value} at index {index})")]
    InvalidWeight { index: usize, value: f64 },

    #[error("sample {index} has value {value} outside [{lo}, {hi}]")]
    ValueOutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("transform denominator vanishes at row {row} for gamma {gamma}")]
    ZeroDenominator { row: usize, gamma: f64 },

    #[error("batch of {len} rows is too small, need at least {min}")]
    BatchTooSmall { len: usize, min: usize },

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("training diverged for every seed")]
    AllSeedsDiverged,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("column {0:?} has no numeric values to impute from")]
    EmptyColumn(String),

    #[error("results file {path} does not match its config hash (stored {stored}, computed {computed})")]
    ConfigHashMismatch {
        path: String,
        stored: String,
        computed: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config file error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("results file error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidConfig(_) | LabelOutOfRange { .. } | InvalidWeight { .. } | Toml(_) => {
                ErrorCategory::Config
            }
            TrainingDiverged { .. } | AllSeedsDiverged => ErrorCategory::Training,
            _ => ErrorCategory::Data,
        }
    }
}
