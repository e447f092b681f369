use thiserror::Error;

/// Errors surfaced by MDP construction, exact evaluation, rollouts, and the
/// text format.
#[derive(Debug, Error)]
pub enum MdpError {
    /// A constructor argument violates a structural invariant.
    #[error("invalid mdp: {0}")]
    Invalid(String),

    /// The linear system of an exact solve failed to factor. With a valid
    /// stochastic matrix and gamma < 1 this cannot happen, so it is reported
    /// as an internal error rather than papered over.
    #[error("singular linear system in exact evaluation of {context}")]
    Singular { context: &'static str },

    /// A rollout produced a non-finite state, action, or reward. The episode
    /// is aborted and the offending quantity reported.
    #[error("non-finite {what} encountered during rollout at step {step}")]
    NonFinite { what: &'static str, step: usize },

    /// The text format failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
