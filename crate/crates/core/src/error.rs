use thiserror::Error;

use crate::pattern::PatternError;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum EspError {
    #[error("malformed instance: {0}")]
    Instance(String),

    #[error("invalid search pattern: {0}")]
    Pattern(#[from] PatternError),

    #[error("instance too large: {what} is {actual}, limit {limit}")]
    TooLarge {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("target out of range: {0}")]
    Target(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("bound violated: {0}")]
    Bound(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = EspError> = std::result::Result<T, E>;
