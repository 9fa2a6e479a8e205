//! Command failures mapped onto the process exit contract.

use std::path::PathBuf;

use thiserror::Error;

/// A failed command, classified by who has to act on it.
///
/// The variant decides the process exit code: `1` for usage and
/// configuration mistakes, `2` for file-system problems, `3` for numerical
/// breakdowns inside the algorithms. Detection outcomes — a supercritical
/// parameterization, a rejected statistical test, an all-flagged fit — are
/// reported results, not failures, and exit `0`.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, malformed or inconsistent configuration.
    #[error("{0}")]
    Usage(String),
    /// The file system did not cooperate.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// An algorithm could not produce a result.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn numerical(message: impl std::fmt::Display) -> Self {
        Self::Numerical(message.to_string())
    }

    /// Exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }
}
