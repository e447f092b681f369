//! Clipped-surrogate policy improvement over a frozen offline dataset.
//!
//! The loop starts at the behavior-cloned policy, takes surrogate gradient
//! steps against a snapshot of the last accepted policy, and promotes a
//! candidate only when its evaluated return strictly improves. The clip band
//! and the learning rate both decay geometrically and freeze at a cutoff
//! step, and every run is a pure function of (dataset, config, seed).

mod config;
mod error;
mod eval;
mod loss;
mod ratio;
mod sample;
mod schedule;
mod train;

pub use config::{TrainConfig, Variant};
pub use error::TrainError;
pub use eval::{evaluate_policy, ContinuousWorld, JEstimate, TabularWorld, World};
pub use loss::{bppo_loss, LossOutput};
pub use ratio::{ratio_samples, ratio_trace, summarize_ratios, RatioSummary};
pub use sample::{sample_loss_batch, LossBatch};
pub use schedule::clip_ratio_schedule;
pub use train::{train_bppo, ImprovementTrace, StepRecord};
