use std::io;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] mirror_corr::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("malformed CSV {path}: {detail}")]
    Csv { path: PathBuf, detail: String },

    /// A check ran to completion and did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 usage/config, 2 numerical convergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use mirror_corr::Error as E;
        match self {
            CliError::Usage(_) | CliError::Csv { .. } => 1,
            CliError::Core(E::Convergence { .. } | E::Eigensolver { .. } | E::FitRejected { .. }) => 2,
            CliError::Core(_) => 1,
            CliError::Failed(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
