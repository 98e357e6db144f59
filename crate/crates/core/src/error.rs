//! Error type shared across the crate.

use thiserror::Error;

/// Phase of a solver step, used to pinpoint divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Prediction,
    Correction,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Prediction => write!(f, "prediction"),
            Phase::Correction => write!(f, "correction"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid state: {0}")]
    State(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {phase} step {inner_step} at time {t}")]
    Divergence {
        t: usize,
        phase: Phase,
        inner_step: usize,
    },

    #[error("reference matrix has zero norm")]
    ZeroReference,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
