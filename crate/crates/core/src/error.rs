use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the testbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("training failure: {0}")]
    TrainingFailure(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-parsable CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidState(_) => "invalid-state",
            Error::TrainingFailure(_) => "training-failure",
            Error::NumericFailure(_) => "numeric-failure",
            Error::Format(_) => "format",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
