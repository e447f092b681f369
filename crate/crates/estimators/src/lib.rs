//! The three supervised fits that precede policy improvement: behavior
//! cloning, SARSA Q-estimation, and Monte-Carlo value fitting, plus the
//! advantage machinery layered on top of them.
//!
//! Every fit is generic over the model representation through the traits in
//! policy-models, so exact tables and MLP heads run through identical
//! training code and the table versions can be held against closed-form
//! optima in tests.

mod advantage;
mod bc;
mod config;
mod error;
mod td;
mod value_fit;

pub use advantage::{asymmetric_weight, normalize_advantages, AdvantageEstimator};
pub use bc::{behavior_cloning, mean_log_likelihood, FittedPolicy};
pub use config::FitConfig;
pub use error::EstimatorError;
pub use td::{
    bootstrap_pairs, fit_q_sarsa, policy_td_step, sarsa_pairs, BootstrapPair, FittedQ, TdFitter,
    TdPair,
};
pub use value_fit::{fit_value, FittedV};
