//! TD fitting of Q with a Polyak-averaged target network.
//!
//! Two successor conventions share the machinery. SARSA takes the successor
//! action the behavior policy actually logged, so it evaluates the behavior
//! policy itself. Policy-successor refits sample the successor action fresh
//! from a given policy at every draw, re-weighting the same transitions
//! toward that policy's value.
//!
//! Episode ends: a `done` transition's target is the bare reward. A horizon
//! timeout is not a real ending, so it must not collapse the target to the
//! reward alone. SARSA has no logged successor action there and drops the
//! final timeout transition instead; policy-successor refits bootstrap
//! through it.

use offline_data::{FieldCodec, OfflineDataset};
use policy_models::{polyak_update, ActionValueModel, Adam, StochasticPolicy};
use rand_chacha::ChaCha8Rng;

use crate::config::FitConfig;
use crate::error::EstimatorError;

/// A fitted Q model with its training diagnostics.
#[derive(Debug, Clone)]
pub struct FittedQ<Q> {
    pub model: Q,
    /// TD loss over every usable sample, against the final target network.
    pub final_td_loss: f64,
    pub steps: usize,
}

/// One SARSA sample: `next` is None when the episode ended here.
#[derive(Debug, Clone)]
pub struct TdPair<S, A> {
    pub state: S,
    pub action: A,
    pub reward: f64,
    pub next: Option<(S, A)>,
}

/// One policy-successor sample: `next_state` is None when the episode
/// ended here. The successor action is drawn at fit time.
#[derive(Debug, Clone)]
pub struct BootstrapPair<S, A> {
    pub state: S,
    pub action: A,
    pub reward: f64,
    pub next_state: Option<S>,
}

/// Online network, trailing target, and optimizer state for TD fitting.
/// Kept public so training loops can interleave a few Q steps with policy
/// steps while preserving optimizer and target state.
#[derive(Debug, Clone)]
pub struct TdFitter<Q: ActionValueModel + Clone> {
    online: Q,
    target: Q,
    adam: Adam,
    tau: f64,
    steps_taken: usize,
    grad: Vec<f64>,
}

impl<Q: ActionValueModel + Clone> TdFitter<Q> {
    pub fn new(model: Q, cfg: &FitConfig) -> Self {
        let adam = Adam::new(cfg.adam, model.n_params());
        let grad = vec![0.0; model.n_params()];
        Self {
            target: model.clone(),
            online: model,
            adam,
            tau: cfg.polyak_tau,
            steps_taken: 0,
            grad,
        }
    }

    pub fn online(&self) -> &Q {
        &self.online
    }

    pub fn target(&self) -> &Q {
        &self.target
    }

    pub fn into_online(self) -> Q {
        self.online
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// One semi-gradient step toward the supplied targets; returns the
    /// batch loss mean((Q(s,a) - y)^2).
    pub fn step_toward(&mut self, batch: &[(&Q::State, &Q::Action, f64)]) -> f64 {
        assert!(!batch.is_empty(), "TD batch must be nonempty");
        let n = batch.len() as f64;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (s, a, y) in batch {
            let err = self.online.q_value(s, a) - y;
            loss += err * err;
            self.online.add_q_grad(s, a, 2.0 * err / n, &mut self.grad);
        }
        loss /= n;
        self.adam
            .step(self.steps_taken, self.online.params_mut(), &self.grad);
        self.steps_taken += 1;
        polyak_update(self.target.params_mut(), self.online.params(), self.tau);
        loss
    }
}

/// Extracts SARSA samples: each transition pairs with its episode's next
/// logged action. Final timeout transitions are dropped (no successor
/// action exists); `done` transitions keep a bare-reward target.
pub fn sarsa_pairs<S, A>(
    dataset: &OfflineDataset<S, A>,
) -> Result<Vec<TdPair<S, A>>, EstimatorError>
where
    S: FieldCodec,
    A: FieldCodec,
{
    let mut pairs = Vec::with_capacity(dataset.len());
    for e in 0..dataset.n_episodes() {
        let episode = dataset.episode(e);
        if episode.len() == 1 && !episode[0].done {
            return Err(EstimatorError::Data(format!(
                "episode {e} is a single non-terminal transition; SARSA needs \
                 a successor action from the same trajectory"
            )));
        }
        for (t, tr) in episode.iter().enumerate() {
            if tr.done {
                pairs.push(TdPair {
                    state: tr.state.clone(),
                    action: tr.action.clone(),
                    reward: tr.reward,
                    next: None,
                });
            } else if let Some(succ) = episode.get(t + 1) {
                pairs.push(TdPair {
                    state: tr.state.clone(),
                    action: tr.action.clone(),
                    reward: tr.reward,
                    next: Some((tr.next_state.clone(), succ.action.clone())),
                });
            }
        }
    }
    if pairs.is_empty() {
        return Err(EstimatorError::Data(
            "dataset yields no usable SARSA samples".into(),
        ));
    }
    Ok(pairs)
}

/// Extracts policy-successor samples: every transition is usable, and only
/// `done` suppresses bootstrapping.
pub fn bootstrap_pairs<S, A>(dataset: &OfflineDataset<S, A>) -> Vec<BootstrapPair<S, A>>
where
    S: FieldCodec,
    A: FieldCodec,
{
    dataset
        .transitions()
        .iter()
        .map(|tr| BootstrapPair {
            state: tr.state.clone(),
            action: tr.action.clone(),
            reward: tr.reward,
            next_state: (!tr.done).then(|| tr.next_state.clone()),
        })
        .collect()
}

/// One TD step on policy-successor samples, drawing each successor action
/// fresh from `policy`. Returns the batch loss.
pub fn policy_td_step<Q, P>(
    fitter: &mut TdFitter<Q>,
    pairs: &[BootstrapPair<Q::State, Q::Action>],
    indices: &[usize],
    policy: &P,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> f64
where
    Q: ActionValueModel + Clone,
    P: StochasticPolicy<State = Q::State, Action = Q::Action>,
{
    let targets: Vec<f64> = indices
        .iter()
        .map(|&i| {
            let p = &pairs[i];
            match &p.next_state {
                Some(s2) => {
                    let a2 = policy.sample_action(s2, rng);
                    p.reward + gamma * fitter.target().q_value(s2, &a2)
                }
                None => p.reward,
            }
        })
        .collect();
    let batch: Vec<(&Q::State, &Q::Action, f64)> = indices
        .iter()
        .zip(&targets)
        .map(|(&i, &y)| (&pairs[i].state, &pairs[i].action, y))
        .collect();
    fitter.step_toward(&batch)
}

/// Fits Q to the behavior policy by SARSA over the logged successor
/// actions, using the discount recorded in the dataset metadata.
pub fn fit_q_sarsa<Q>(
    dataset: &OfflineDataset<Q::State, Q::Action>,
    model: Q,
    cfg: &FitConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FittedQ<Q>, EstimatorError>
where
    Q: ActionValueModel + Clone,
    Q::State: FieldCodec,
    Q::Action: FieldCodec,
{
    let gamma = dataset.meta().gamma;
    let pairs = sarsa_pairs(dataset)?;
    let mut fitter = TdFitter::new(model, cfg);

    for step in 0..cfg.steps {
        let indices = draw_indices(pairs.len(), cfg, rng);
        let targets: Vec<f64> = indices
            .iter()
            .map(|&i| {
                let p = &pairs[i];
                match &p.next {
                    Some((s2, a2)) => p.reward + gamma * fitter.target().q_value(s2, a2),
                    None => p.reward,
                }
            })
            .collect();
        let batch: Vec<(&Q::State, &Q::Action, f64)> = indices
            .iter()
            .zip(&targets)
            .map(|(&i, &y)| (&pairs[i].state, &pairs[i].action, y))
            .collect();
        let loss = fitter.step_toward(&batch);
        if !loss.is_finite() {
            return Err(EstimatorError::NonFinite {
                what: "TD loss",
                step,
            });
        }
    }

    let final_td_loss = td_loss(&fitter, &pairs, gamma);
    Ok(FittedQ {
        model: fitter.into_online(),
        final_td_loss,
        steps: cfg.steps,
    })
}

/// Full-set TD loss of the online network against the current target.
fn td_loss<Q>(fitter: &TdFitter<Q>, pairs: &[TdPair<Q::State, Q::Action>], gamma: f64) -> f64
where
    Q: ActionValueModel + Clone,
{
    pairs
        .iter()
        .map(|p| {
            let y = match &p.next {
                Some((s2, a2)) => p.reward + gamma * fitter.target().q_value(s2, a2),
                None => p.reward,
            };
            (fitter.online().q_value(&p.state, &p.action) - y).powi(2)
        })
        .sum::<f64>()
        / pairs.len() as f64
}

pub(crate) fn draw_indices(len: usize, cfg: &FitConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if cfg.full_batch {
        (0..len).collect()
    } else {
        let size = cfg.batch_size.min(len);
        (0..size).map(|_| rand::Rng::random_range(rng, 0..len)).collect()
    }
}
