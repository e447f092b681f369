//! Exact machinery for small finite MDPs, plus the continuous environments the
//! rest of the workspace trains against.
//!
//! Everything tabular here is solved directly: state values, action values,
//! discounted visitation frequencies, returns, and performance differences all
//! come from LU solves against the transition matrix, so downstream code can
//! treat them as ground truth rather than estimates. Total-variation distances
//! between policies (discrete rows and diagonal Gaussians) live here too, since
//! both the training diagnostics and the bound checks consume them.

mod env;
mod error;
mod format;
mod gen;
mod mdp;
mod rng;
mod rollout;
mod tv;

pub use env::{ContinuousEnv, PointReach};
pub use error::MdpError;
pub use format::{load_mdp, save_mdp};
pub use gen::{epsilon_soft, perturbed_policy, random_mdp, random_policy, RandomMdpSpec};
pub use mdp::{PerformanceDifference, TabularMdp, TabularPolicy};
pub use rng::{substream, stream};
pub use rollout::{
    rollout_continuous, rollout_tabular, ContinuousStep, ContinuousTrajectory, TabularStep,
    TabularTrajectory,
};
pub use tv::{dataset_tv_divergence, gauss_legendre, tv_discrete, tv_gaussian_diag};
