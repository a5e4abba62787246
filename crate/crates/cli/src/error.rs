use std::io;
use std::path::PathBuf;

use surfwl::PnmError;

/// Process exit statuses, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const PARSE: i32 = 5;
    pub const NETWORK: i32 = 6;
    pub const INTEGRITY: i32 = 7;
    pub const CACHE: i32 = 8;
    pub const PARTIAL: i32 = 10;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: PnmError,
    },
    #[error("network: {0}")]
    Network(String),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("cache {}: {reason}", path.display())]
    Cache { path: PathBuf, reason: String },
    #[error("{failed} of {total} inputs failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn cache(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::Cache {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
            CliError::Parse { .. } => exit::PARSE,
            CliError::Network(_) => exit::NETWORK,
            CliError::Integrity(_) => exit::INTEGRITY,
            CliError::Cache { .. } => exit::CACHE,
            CliError::Partial { .. } => exit::PARTIAL,
        }
    }
}

/// Collapses per-input failures: none is success, all-failed with a single
/// input keeps that input's own error, anything else is partial.
pub fn summarize(mut errors: Vec<CliError>, total: usize) -> Result<(), CliError> {
    match errors.len() {
        0 => Ok(()),
        1 if total == 1 => Err(errors.remove(0)),
        failed => Err(CliError::Partial { failed, total }),
    }
}
