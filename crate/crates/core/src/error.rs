use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    #[error("`{what}` out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("alpha = {alpha} gives an infinite mean trap depth (requires alpha > 1)")]
    InfiniteMean { alpha: f64 },

    #[error("regime error for alpha = {alpha}: {requirement}")]
    Regime {
        alpha: f64,
        requirement: &'static str,
    },

    #[error("window too small: boundary leak {leak:e} exceeds 10 x tol = {limit:e}")]
    WindowTooSmall { leak: f64, limit: f64 },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("unknown configuration key `{key}` for `{command}`")]
    UnknownKey { command: String, key: String },

    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        LabError::Parameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        LabError::Range {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}
