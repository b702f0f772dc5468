use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Physics(#[from] damposc_core::Error),

    #[error("{failed} invariant check(s) failed")]
    ChecksFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use damposc_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::ReadConfig { .. } => 2,
            CliError::Physics(E::DegenerateDamping { .. } | E::Caustic { .. }) => 3,
            CliError::ChecksFailed { .. } => 4,
            _ => 1,
        }
    }
}
