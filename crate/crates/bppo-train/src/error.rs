use crate::train::StepRecord;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),

    #[error("training aborted at step {step}: {reason}")]
    Aborted {
        step: usize,
        reason: String,
        /// Everything recorded before the abort, so callers can still flush
        /// a metrics file.
        records: Vec<StepRecord>,
    },

    #[error(transparent)]
    Estimator(#[from] estimators::EstimatorError),

    #[error(transparent)]
    Data(#[from] offline_data::DataError),

    #[error(transparent)]
    World(#[from] mdp_core::MdpError),
}
