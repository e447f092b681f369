use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    /// A fitting loss left the reals. The fit aborts rather than returning
    /// a poisoned model.
    #[error("{what} became non-finite at step {step}")]
    NonFinite { what: &'static str, step: usize },
    /// The dataset cannot support the requested fit.
    #[error("{0}")]
    Data(String),
    #[error("advantage batch must hold at least two samples, got {0}")]
    ShortBatch(usize),
}
