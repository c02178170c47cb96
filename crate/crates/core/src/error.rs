//! Crate-wide error type with stable process exit codes.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Each variant maps to a fixed exit code so ablation scripts can
/// distinguish bad configs from bad data from numeric blowups.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration. The message lists every offending key.
    #[error("config error: {0}")]
    Config(String),

    /// Missing, malformed, or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// Non-finite value encountered during numeric work.
    #[error("numeric failure: non-finite value in `{tensor}` ({detail})")]
    NonFinite { tensor: &'static str, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Exit code contract: 0 success, 2 config error, 3 data error,
    /// 4 numeric failure. Io/Json surface as data errors (3).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Io(_) | Error::Json(_) => 3,
            Error::NonFinite { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
