//! One error class per exit code, so scripts can branch on what went wrong.

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
/// Bad flags, malformed config, unknown names.
pub const EXIT_USAGE: i32 = 2;
/// Missing or unreadable datasets, checkpoints, and output paths.
pub const EXIT_DATA: i32 = 3;
/// Training or evaluation left the reals and aborted.
pub const EXIT_NUMERICAL: i32 = 4;
/// A verification battery reported at least one failed case.
pub const EXIT_VERIFICATION: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

impl From<offline_data::DataError> for CliError {
    fn from(e: offline_data::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<policy_models::CheckpointError> for CliError {
    fn from(e: policy_models::CheckpointError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<mdp_core::MdpError> for CliError {
    fn from(e: mdp_core::MdpError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<estimators::EstimatorError> for CliError {
    fn from(e: estimators::EstimatorError) -> Self {
        match e {
            estimators::EstimatorError::Data(msg) => CliError::Data(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<bppo_train::TrainError> for CliError {
    fn from(e: bppo_train::TrainError) -> Self {
        match e {
            bppo_train::TrainError::Config(msg) => CliError::Usage(msg),
            bppo_train::TrainError::Data(inner) => inner.into(),
            bppo_train::TrainError::Estimator(inner) => inner.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
