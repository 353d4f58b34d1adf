//! Error handling for the command-line tools, with one exit code per
//! failure class so scripts can tell them apart.

use std::path::PathBuf;

use headpose_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        /// 1-based line number; 0 when the error is not line-addressable.
        line: usize,
        message: String,
    },
    #[error("split infeasible: {0}")]
    SplitInfeasible(String),
    #[error("degenerate training: {0}")]
    DegenerateTraining(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    InvalidData(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Exit status for this failure class; documented in the long help.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::SplitInfeasible(_) => 5,
            CliError::DegenerateTraining(_) => 6,
            CliError::Numerical(_) => 7,
            CliError::InvalidData(_) => 8,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::SplitInfeasible(msg) => CliError::SplitInfeasible(msg),
            CoreError::DegenerateTraining => {
                CliError::DegenerateTraining("both classes must be present".into())
            }
            CoreError::NumericalFailure(msg) => CliError::Numerical(msg),
            other => CliError::InvalidData(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
