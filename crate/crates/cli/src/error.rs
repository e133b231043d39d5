use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(#[from] risbrt::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for usage, configuration and I/O problems, 2 for numerical
    /// failures, 3 when a Monte Carlo validation fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(risbrt::Error::InvalidConfig(_) | risbrt::Error::InvalidSpec(_)) => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
