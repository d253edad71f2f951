//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometry, solver, and CLI operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A point does not belong to the space an operation was called on.
    #[error("space/point kind mismatch: {0}")]
    KindMismatch(String),

    /// Invalid argument (out-of-range parameter, empty input, bad weights).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A chart operation was requested at a point where the chart degenerates
    /// (some length coordinate is at or below the chart threshold).
    #[error("chart-degenerate: {0}")]
    ChartDegenerate(String),

    /// Config file parse error with a 1-based line number.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::KindMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::ChartDegenerate(msg.into())
    }
}
