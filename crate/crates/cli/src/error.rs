use std::path::PathBuf;

use qfric_core::Error as CoreError;
use qfric_sweep::SweepError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {field}: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Sweep(#[from] SweepError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} sweep cell(s) failed and remain pending; rerun to resume")]
    IncompleteSweep(usize),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Config(_) | CoreError::Domain(_) | CoreError::DegenerateChannel => EXIT_CONFIG,
        CoreError::Leakage { .. }
        | CoreError::Stability(_)
        | CoreError::Integrator(_)
        | CoreError::Singular(_)
        | CoreError::UndefinedMeasure(_) => EXIT_NUMERICAL,
        _ => EXIT_FAILURE,
    }
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::ConfigFile { .. } => EXIT_CONFIG,
            CliError::Core(e) => core_code(e),
            CliError::Sweep(SweepError::Core(e)) | CliError::Sweep(SweepError::Cell { source: e, .. }) => core_code(e),
            CliError::Sweep(SweepError::Plan(_)) => EXIT_CONFIG,
            CliError::IncompleteSweep(_) => EXIT_NUMERICAL,
            CliError::VerificationFailed(_) => EXIT_VERIFICATION,
            _ => EXIT_FAILURE,
        }
    }
}
