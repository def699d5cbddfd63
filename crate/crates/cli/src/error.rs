use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Library { context: String, source: rgue::Error },

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library { source, .. } => match source {
                rgue::Error::NonConvergence { .. }
                | rgue::Error::NoConvergence { .. }
                | rgue::Error::LeftHalfPlaneEscape { .. } => 3,
                _ => 1,
            },
            CliError::Io { .. } | CliError::ChecksFailed(_) => 1,
        }
    }
}

/// Attaches context to library results.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for rgue::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Library { context: what.into(), source })
    }
}
