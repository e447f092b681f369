//! Episode rollouts for tabular MDPs and continuous environments.

use rand_chacha::ChaCha8Rng;

use crate::env::ContinuousEnv;
use crate::error::MdpError;
use crate::mdp::{TabularMdp, TabularPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabularStep {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// One tabular episode. Tabular worlds have no terminal states, so every
/// episode runs to the horizon and ends by timeout.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularTrajectory {
    pub steps: Vec<TabularStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStep {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// True when the environment itself ended the episode at this step, as
    /// opposed to the horizon cutting it off.
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTrajectory {
    pub steps: Vec<ContinuousStep>,
}

impl TabularTrajectory {
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        discounted(self.steps.iter().map(|s| s.reward), gamma)
    }
}

impl ContinuousTrajectory {
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        discounted(self.steps.iter().map(|s| s.reward), gamma)
    }

    pub fn undiscounted_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

fn discounted(rewards: impl Iterator<Item = f64>, gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut scale = 1.0;
    for r in rewards {
        total += scale * r;
        scale *= gamma;
    }
    total
}

/// Rolls out one episode of `pi` in `mdp`, for the MDP's configured horizon.
pub fn rollout_tabular(
    mdp: &TabularMdp,
    pi: &TabularPolicy,
    rng: &mut ChaCha8Rng,
) -> TabularTrajectory {
    let mut steps = Vec::with_capacity(mdp.horizon());
    let mut state = sample_index(mdp.initial_dist(), rng);
    for _ in 0..mdp.horizon() {
        let action = pi.sample(state, rng);
        let next_state = sample_index(mdp.transition_row(state, action), rng);
        steps.push(TabularStep {
            state,
            action,
            reward: mdp.reward(state, action),
            next_state,
        });
        state = next_state;
    }
    TabularTrajectory { steps }
}

/// Rolls out one episode in a continuous environment, sampling actions from
/// `policy`. Aborts with a diagnostic if any state, action, or reward comes
/// out non-finite, or if a reward escapes the environment's declared bound.
pub fn rollout_continuous<E, F>(
    env: &E,
    mut policy: F,
    rng: &mut ChaCha8Rng,
) -> Result<ContinuousTrajectory, MdpError>
where
    E: ContinuousEnv,
    F: FnMut(&[f64], &mut ChaCha8Rng) -> Vec<f64>,
{
    let mut steps = Vec::with_capacity(env.horizon());
    let mut state = env.reset(rng);
    ensure_finite(&state, "state", 0)?;
    for t in 0..env.horizon() {
        let action = policy(&state, rng);
        ensure_finite(&action, "action", t)?;
        let (next_state, reward, done) = env.step(&state, &action, rng);
        ensure_finite(&next_state, "state", t)?;
        if !reward.is_finite() {
            return Err(MdpError::NonFinite {
                what: "reward",
                step: t,
            });
        }
        if reward.abs() > env.max_abs_reward() {
            return Err(MdpError::Invalid(format!(
                "reward {reward} at step {t} exceeds the declared bound {}",
                env.max_abs_reward()
            )));
        }
        steps.push(ContinuousStep {
            state: state.clone(),
            action,
            reward,
            next_state: next_state.clone(),
            done,
        });
        if done {
            break;
        }
        state = next_state;
    }
    Ok(ContinuousTrajectory { steps })
}

fn ensure_finite(xs: &[f64], what: &'static str, step: usize) -> Result<(), MdpError> {
    if xs.iter().any(|x| !x.is_finite()) {
        Err(MdpError::NonFinite { what, step })
    } else {
        Ok(())
    }
}

fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rand::Rng::random(rng);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
