use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Solver(#[from] hiord_core::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn input(msg: impl Into<String>) -> Self {
        HarnessError::Input(msg.into())
    }

    /// Process exit status: 64 for unusable input, 1 for failures
    /// during a computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Io { .. } | HarnessError::Json(_) | HarnessError::Input(_) => 64,
            HarnessError::Solver(_) | HarnessError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
