//! Logging runs: roll a behavior policy and record every transition.

use mdp_core::{
    rollout_continuous, rollout_tabular, stream, substream, ContinuousEnv, PointReach,
    TabularMdp, TabularPolicy,
};

use crate::dataset::{DatasetMeta, OfflineDataset, Transition};
use crate::error::DataError;

/// SOURCE_DATE_EPOCH when set, otherwise 0, so regenerating a dataset
/// yields byte-identical files.
fn creation_stamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

/// Logs `n_episodes` full-horizon episodes of `behavior` acting in `mdp`.
/// Tabular worlds have no terminal states, so every episode ends by timeout.
pub fn generate_tabular(
    mdp: &TabularMdp,
    behavior: &TabularPolicy,
    n_episodes: usize,
    seed: u64,
    env_name: &str,
    behavior_desc: &str,
) -> Result<OfflineDataset<usize, usize>, DataError> {
    if n_episodes == 0 {
        return Err(DataError::Empty);
    }
    let mut rng = substream(seed, stream::DATASET);
    let mut transitions = Vec::with_capacity(n_episodes * mdp.horizon());
    for episode_id in 0..n_episodes {
        let traj = rollout_tabular(mdp, behavior, &mut rng);
        let last = traj.steps.len() - 1;
        for (t, step) in traj.steps.iter().enumerate() {
            transitions.push(Transition {
                state: step.state,
                action: step.action,
                reward: step.reward,
                next_state: step.next_state,
                done: false,
                timeout: t == last,
                episode_id,
                t,
            });
        }
    }
    let meta = DatasetMeta {
        env: env_name.to_string(),
        behavior: behavior_desc.to_string(),
        seed,
        gamma: mdp.gamma(),
        created: creation_stamp(),
    };
    OfflineDataset::new(meta, transitions)
}

/// Logs episodes of the noisy proportional controller reaching for the goal.
/// `gamma` is recorded for downstream return labeling; the controller itself
/// is undiscounted.
pub fn generate_point_reach(
    env: &PointReach,
    noise_std: f64,
    n_episodes: usize,
    seed: u64,
    gamma: f64,
    env_name: &str,
) -> Result<OfflineDataset<Vec<f64>, Vec<f64>>, DataError> {
    if n_episodes == 0 {
        return Err(DataError::Empty);
    }
    let mut rng = substream(seed, stream::DATASET);
    let mut transitions = Vec::with_capacity(n_episodes * env.horizon());
    for episode_id in 0..n_episodes {
        let traj = rollout_continuous(
            env,
            |s, rng: &mut rand_chacha::ChaCha8Rng| env.behavior_action(s, noise_std, rng),
            &mut rng,
        )?;
        let last = traj.steps.len() - 1;
        for (t, step) in traj.steps.iter().enumerate() {
            transitions.push(Transition {
                state: step.state.clone(),
                action: step.action.clone(),
                reward: step.reward,
                next_state: step.next_state.clone(),
                done: step.done,
                timeout: t == last && !step.done,
                episode_id,
                t,
            });
        }
    }
    let meta = DatasetMeta {
        env: env_name.to_string(),
        behavior: format!("prop-{noise_std:.2}"),
        seed,
        gamma,
        created: creation_stamp(),
    };
    OfflineDataset::new(meta, transitions)
}
