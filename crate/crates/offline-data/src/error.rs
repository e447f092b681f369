use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    /// Datasets must hold at least one transition; estimators have nothing
    /// to fit otherwise.
    #[error("dataset contains no transitions")]
    Empty,
    /// A transition violates a container invariant. The index counts
    /// transitions in file order, starting at zero.
    #[error("transition {index}: {msg}")]
    Malformed { index: usize, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported dataset format version {found:?}")]
    Version { found: String },
    #[error("{0}")]
    Invalid(String),
    #[error("rollout failed: {0}")]
    Rollout(#[from] mdp_core::MdpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
