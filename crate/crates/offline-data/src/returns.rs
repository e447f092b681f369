//! Discounted return-to-go labels.

use crate::dataset::{FieldCodec, OfflineDataset};

/// Labels every transition with G_t, computed by the backward recursion
/// G_t = r_t + gamma * G_{t+1} inside each episode, G = r on final steps.
/// The returned vector is aligned with `dataset.transitions()`.
pub fn monte_carlo_returns<S: FieldCodec, A: FieldCodec>(
    dataset: &OfflineDataset<S, A>,
    gamma: f64,
) -> Vec<f64> {
    let mut labels = vec![0.0; dataset.len()];
    let transitions = dataset.transitions();
    for e in 0..dataset.n_episodes() {
        let (start, end) = dataset.episode_range(e);
        let mut tail = 0.0;
        for i in (start..end).rev() {
            tail = transitions[i].reward + gamma * tail;
            labels[i] = tail;
        }
    }
    labels
}
