//! Offline transition datasets: logging runs, discounted return labels,
//! minibatch sampling, and a line-oriented text format whose round trips
//! are byte-identical.
//!
//! Everything downstream trains from one of these datasets and nothing
//! else, so the container validates its invariants at construction: contiguous
//! episodes, strictly increasing timesteps, next-state chaining, and end
//! flags only where an episode actually ends.

mod dataset;
mod error;
mod format;
mod generate;
mod returns;

pub use dataset::{DatasetMeta, FieldCodec, OfflineDataset, Transition, CHAIN_TOL};
pub use error::DataError;
pub use format::{dataset_from_str, dataset_to_string, load_dataset, save_dataset};
pub use generate::{generate_point_reach, generate_tabular};
pub use returns::monte_carlo_returns;

/// Logged from a tabular world: state and action are indices.
pub type TabularDataset = OfflineDataset<usize, usize>;
/// Logged from a continuous environment: state and action are vectors.
pub type ContinuousDataset = OfflineDataset<Vec<f64>, Vec<f64>>;
