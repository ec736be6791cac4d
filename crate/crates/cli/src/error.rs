use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line tool, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("[Io] cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("[SchemaError] {0}")]
    Schema(String),
    /// The file parsed but describes an invalid problem.
    #[error("[{name}] {0}", name = .0.name())]
    Invalid(subproj_core::Error),
    /// Numerics failed while running a valid problem.
    #[error("[{name}] {0}", name = .0.name())]
    Numeric(subproj_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Schema(_) | CliError::Invalid(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
