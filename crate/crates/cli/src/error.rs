use std::io;

use hypergrowth_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 2 for bad data or arguments, 3 for non-hyperbolic data, 4 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NonHyperbolic { .. }) => 3,
            CliError::Core(Error::Io(_)) | CliError::Io { .. } => 4,
            CliError::Core(Error::Csv(e)) if e.is_io_error() => 4,
            CliError::Json(e) if e.is_io() => 4,
            CliError::Core(_) | CliError::Usage(_) | CliError::Json(_) => 2,
        }
    }
}
