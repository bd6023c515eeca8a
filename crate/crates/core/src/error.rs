use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SglError>;

#[derive(Debug, Error)]
pub enum SglError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("group {0} is empty")]
    EmptyGroup(usize),

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid bracket [{lower}, {upper}]")]
    InvalidBracket { lower: f64, upper: f64 },

    #[error("objective evaluated to a non-finite value at x = {0}")]
    NonFiniteEvaluation(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SglError {
    pub(crate) fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        SglError::Input {
            path: path.into(),
            message: message.into(),
        }
    }
}
