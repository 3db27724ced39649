//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HmevError {
    /// A distribution was constructed with an invalid parameter value.
    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A probability argument fell outside its required range.
    #[error("probability out of range: {0} (must lie in the open interval (0,1))")]
    ProbabilityOutOfRange(f64),

    /// Parameter vector length disagrees with the model dimension.
    #[error("dimension mismatch: got {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    /// The data cannot support the requested operation.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Sampler could not be started or aborted during warmup.
    #[error("sampler failure: {0}")]
    Sampler(String),

    /// Requested metric is undefined for the given inputs.
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV layer failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Configuration file could not be decoded.
    #[error("config error: {0}")]
    Config(String),
}
