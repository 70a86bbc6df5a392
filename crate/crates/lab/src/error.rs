use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] winfree_core::Error),
}

impl LabError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Core(winfree_core::Error::Integration { .. })
            | LabError::Core(winfree_core::Error::Solver { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
