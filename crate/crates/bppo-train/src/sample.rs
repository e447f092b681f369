use estimators::{normalize_advantages, AdvantageEstimator};
use offline_data::{FieldCodec, OfflineDataset};
use policy_models::{ActionValueModel, StateValueModel, StochasticPolicy};
use rand_chacha::ChaCha8Rng;

use crate::config::TrainConfig;
use crate::error::TrainError;

/// One surrogate batch: dataset states with snapshot-policy actions and
/// normalized asymmetric advantages, kept in aligned columns.
#[derive(Debug, Clone)]
pub struct LossBatch<S, A> {
    pub states: Vec<S>,
    pub actions: Vec<A>,
    pub advantages: Vec<f64>,
}

impl<S, A> LossBatch<S, A> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Draws `minibatch` states uniformly from the dataset, samples
/// `actions_per_state` actions from the snapshot policy at each, and labels
/// every pair with its batch-normalized weighted advantage.
pub fn sample_loss_batch<P, Q, V>(
    dataset: &OfflineDataset<P::State, P::Action>,
    pi_k: &P,
    estimator: &AdvantageEstimator<Q, V>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LossBatch<P::State, P::Action>, TrainError>
where
    P: StochasticPolicy,
    P::State: FieldCodec,
    P::Action: FieldCodec,
    Q: ActionValueModel<State = P::State, Action = P::Action>,
    V: StateValueModel<State = P::State>,
{
    let draw = cfg.minibatch.min(dataset.len());
    let indices = dataset.sample_indices(draw, rng)?;
    let mut states = Vec::with_capacity(draw * cfg.actions_per_state);
    let mut actions = Vec::with_capacity(draw * cfg.actions_per_state);
    let mut advantages = Vec::with_capacity(draw * cfg.actions_per_state);
    for idx in indices {
        let s = &dataset.transitions()[idx].state;
        for _ in 0..cfg.actions_per_state {
            let a = pi_k.sample_action(s, rng);
            advantages.push(estimator.weighted_advantage(s, &a));
            states.push(s.clone());
            actions.push(a);
        }
    }
    normalize_advantages(&mut advantages)?;
    Ok(LossBatch {
        states,
        actions,
        advantages,
    })
}
