use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {source}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}:{line}: unsupported schema_version {found} (expected {expected})", path.display())]
    SchemaVersion {
        path: PathBuf,
        line: usize,
        found: u32,
        expected: u32,
    },

    #[error("{}: {message}", path.display())]
    Output { path: PathBuf, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid onion domain {0:?}")]
    InvalidDomain(String),

    #[error("invalid ledger for {address}: {reason}")]
    InvalidLedger { address: String, reason: String },

    #[error("stage not run: {0}")]
    StageNotRun(&'static str),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
