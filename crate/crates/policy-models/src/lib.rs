//! Function approximators for the offline-improvement pipeline.
//!
//! All models keep their parameters in one flat `Vec<f64>` so the optimizer,
//! gradient clipping, checkpointing, and finite-difference probing can treat
//! every architecture uniformly. Gradients are analytic and hand-derived;
//! the test suites hold them against central differences.

mod checkpoint;
mod init;
mod mlp;
mod optim;
mod policy;
mod value;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointEntry, CheckpointError};
pub use init::{init_mlp_params, orthogonal_matrix};
pub use mlp::{Activation, MlpCache, MlpShape};
pub use optim::{scheduled_value, Adam, AdamConfig, StepOutcome};
pub use policy::{GaussianMlpPolicy, SoftmaxPolicy, StochasticPolicy};
pub use value::{
    polyak_update, ActionValueModel, MlpQ, MlpV, StateValueModel, TableQ, TableV,
};
