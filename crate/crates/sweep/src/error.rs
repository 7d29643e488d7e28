use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Core(#[from] qfric_core::Error),

    #[error("cell (k = {k}, gamma = {gamma}, hbar_eff = {hbar}): {source}")]
    Cell {
        k: f64,
        gamma: f64,
        hbar: f64,
        #[source]
        source: qfric_core::Error,
    },

    #[error("invalid sweep plan: {0}")]
    Plan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: corrupt checkpoint: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl SweepError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| SweepError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, SweepError>;
