//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Too many malformed lines, or a structurally unreadable input file.
    #[error("parse failure in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bad file format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("missing artifact for stage `{stage}`: {path} not found; run the `{needed}` stage first")]
    MissingArtifact {
        stage: String,
        path: PathBuf,
        needed: String,
    },

    /// Artifacts produced under different configurations must not be mixed.
    #[error("config hash mismatch in {path}: artifact has {found}, current config expects {expected}")]
    HashMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("config error: {0}")]
    Config(String),

    /// Optimization failed to produce finite parameters on every restart.
    #[error("training diverged: {0}")]
    Diverged(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
