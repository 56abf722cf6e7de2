use std::io;
use std::path::PathBuf;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qlangevin_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("writing table: {0}")]
    Csv(#[from] csv::Error),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qlangevin_core::Error::Resource(_)) => 4,
            CliError::Tolerance(_) => 3,
            _ => 2,
        }
    }
}
