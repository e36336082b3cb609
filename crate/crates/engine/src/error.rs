use std::io;
use std::path::PathBuf;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    InvalidInput = 2,
    Internal = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: aura_core::Error,
    },

    #[error(transparent)]
    Core(#[from] aura_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Usage(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl EngineError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        EngineError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            EngineError::Usage(_) => ExitStatus::Usage,
            EngineError::Internal(_) => ExitStatus::Internal,
            _ => ExitStatus::InvalidInput,
        }
    }
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
