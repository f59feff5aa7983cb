use std::path::PathBuf;

use crate::model::{ConfigId, ScriptKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures that abort an operation. Anything recoverable is reported as a
/// [`crate::model::Diagnostic`] instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("UNKNOWN_PACKAGE: {0} is neither in the universe nor installed")]
    UnknownPackage(String),
    #[error("MALFORMED_SPEC: section %{section} appears more than once (line {line})")]
    MalformedSpec { section: &'static str, line: usize },
    #[error("MALFORMED_MANIFEST: {0}")]
    MalformedManifest(String),
    #[error("IO_ERROR: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("LOG_DISCONTINUITY: transaction starts at {found} but the log head is {expected}")]
    LogDiscontinuity { expected: ConfigId, found: ConfigId },
    #[error("MISSING_PREIMAGE: {0}")]
    MissingPreimage(String),
    #[error("UNKNOWN_CONFIG: {0} is not a logged checkpoint")]
    UnknownConfig(ConfigId),
    #[error("ROLLBACK_FAILED at step {step}: {reason}")]
    RollbackFailed { step: usize, reason: String },
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
    #[error("unsupported document format {found:?}, expected {expected:?}")]
    Format { expected: String, found: String },
    #[error("script kind {0} does not belong to this package dialect")]
    DialectMismatch(ScriptKind),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
