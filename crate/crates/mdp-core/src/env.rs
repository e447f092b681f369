//! Continuous control environments.
//!
//! Environments are deliberately tiny: low-dimensional, short-horizon, cheap
//! to roll out thousands of times on one core. The dynamics are fully
//! determined by an environment seed plus the generator passed into each
//! step, so trajectories are reproducible end to end.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::rng::{stream, substream};

/// A continuous-state, continuous-action episodic environment.
pub trait ContinuousEnv {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Episodes are cut off after this many steps.
    fn horizon(&self) -> usize;
    /// Symmetric per-dimension action bound; actions are clipped to
    /// [-bound, +bound] inside `step`.
    fn action_bound(&self) -> f64;
    /// A bound on |reward| valid for every state reachable within the
    /// horizon. Rollouts enforce it.
    fn max_abs_reward(&self) -> f64;
    fn reset(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Advances one step, returning (next_state, reward, done).
    fn step(&self, state: &[f64], action: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, f64, bool);
}

/// Planar point-mass reaching task.
///
/// The state is a position in the plane, the action a velocity command in
/// [-1, 1]^2. Each step moves the point by a tenth of the clipped command
/// plus small Gaussian noise, and the reward is the negative Euclidean
/// distance from the position where the action was taken to a goal that is
/// fixed per environment seed. Episodes never terminate early; they run to
/// the horizon.
#[derive(Debug, Clone)]
pub struct PointReach {
    goal: [f64; 2],
    horizon: usize,
}

/// How far one step can travel: action scale plus essentially all of the
/// transition noise.
const STEP_SCALE: f64 = 0.1;
const NOISE_STD: f64 = 0.01;
const START_HALF_WIDTH: f64 = 1.0;
const GOAL_HALF_WIDTH: f64 = 0.5;

impl PointReach {
    pub fn new(env_seed: u64, horizon: usize) -> Self {
        assert!(horizon > 0, "horizon must be positive");
        let mut rng = substream(env_seed, stream::ENV);
        let goal = [
            rng.random_range(-GOAL_HALF_WIDTH..GOAL_HALF_WIDTH),
            rng.random_range(-GOAL_HALF_WIDTH..GOAL_HALF_WIDTH),
        ];
        Self { goal, horizon }
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    /// A proportional controller toward the goal with Gaussian exploration
    /// noise, clipped to the action bound. This is the behavior policy used
    /// to log datasets.
    pub fn behavior_action(&self, state: &[f64], noise_std: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let normal = Normal::new(0.0, noise_std).expect("valid std");
        (0..2)
            .map(|k| {
                let pull = self.goal[k] - state[k];
                (pull + normal.sample(rng)).clamp(-1.0, 1.0)
            })
            .collect()
    }
}

impl ContinuousEnv for PointReach {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn action_bound(&self) -> f64 {
        1.0
    }

    fn max_abs_reward(&self) -> f64 {
        // Worst case: start in the far corner and walk away from the goal at
        // full speed all episode, with a generous allowance for noise.
        let start = START_HALF_WIDTH * std::f64::consts::SQRT_2;
        let goal = GOAL_HALF_WIDTH * std::f64::consts::SQRT_2;
        let travel = self.horizon as f64 * (STEP_SCALE * std::f64::consts::SQRT_2 + 6.0 * NOISE_STD);
        start + goal + travel
    }

    fn reset(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![
            rng.random_range(-START_HALF_WIDTH..START_HALF_WIDTH),
            rng.random_range(-START_HALF_WIDTH..START_HALF_WIDTH),
        ]
    }

    fn step(&self, state: &[f64], action: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, f64, bool) {
        assert_eq!(state.len(), 2, "state must be two-dimensional");
        assert_eq!(action.len(), 2, "action must be two-dimensional");
        let normal = Normal::new(0.0, NOISE_STD).expect("valid std");
        let next: Vec<f64> = (0..2)
            .map(|k| state[k] + STEP_SCALE * action[k].clamp(-1.0, 1.0) + normal.sample(rng))
            .collect();
        let dist = ((state[0] - self.goal[0]).powi(2) + (state[1] - self.goal[1]).powi(2)).sqrt();
        (next, -dist, false)
    }
}
