use thiserror::Error;

use crate::gpp::GameRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} options")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid call: {0}")]
    InvalidCall(String),

    #[error("engine failure: {message}")]
    EngineFailure {
        message: String,
        /// Moves played before the failure, when a game was in progress.
        partial: Option<Box<GameRecord>>,
    },

    #[error("protocol error: {message} (offending line: {line:?})")]
    Protocol { message: String, line: String },

    #[error("internal solver defect: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
