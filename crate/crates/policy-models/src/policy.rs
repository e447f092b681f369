//! Stochastic policies: tabular softmax and diagonal-Gaussian MLP.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use mdp_core::TabularPolicy;

use crate::init::init_mlp_params;
use crate::mlp::{Activation, MlpShape};

/// The legal range for stored per-dimension log standard deviations.
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

/// A parametric stochastic policy with analytic log-density gradients.
///
/// All parameters sit in one flat slice so optimizers and checkpoints can
/// stay architecture-agnostic. `project_params` restores any range
/// constraints a policy keeps on its parameters (the Gaussian log-std clamp);
/// training loops call it after every optimizer step.
pub trait StochasticPolicy {
    type State: Clone + std::fmt::Debug;
    type Action: Clone + std::fmt::Debug;

    fn n_params(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn log_prob(&self, s: &Self::State, a: &Self::Action) -> f64;
    /// Accumulates `coef * d log_prob(a|s) / d theta` into `grad`.
    fn add_log_prob_grad(&self, s: &Self::State, a: &Self::Action, coef: f64, grad: &mut [f64]);
    fn sample_action(&self, s: &Self::State, rng: &mut ChaCha8Rng) -> Self::Action;
    fn project_params(&mut self) {}
}

/// Softmax-over-logits policy for finite worlds, one logit row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    n_states: usize,
    n_actions: usize,
    theta: Vec<f64>,
}

impl SoftmaxPolicy {
    /// All-zero logits: the uniform policy.
    pub fn new_uniform(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states > 0 && n_actions > 0, "shape must be positive");
        Self {
            n_states,
            n_actions,
            theta: vec![0.0; n_states * n_actions],
        }
    }

    pub fn from_logits(n_states: usize, n_actions: usize, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), n_states * n_actions, "logit table shape mismatch");
        assert!(theta.iter().all(|t| t.is_finite()), "logits must be finite");
        Self {
            n_states,
            n_actions,
            theta,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.theta[s * self.n_actions..(s + 1) * self.n_actions]
    }

    fn log_softmax_row(&self, s: usize) -> Vec<f64> {
        let row = self.row(s);
        let max = row.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        row.iter().map(|x| x - lse).collect()
    }

    /// Action distribution at state `s`.
    pub fn action_probs(&self, s: usize) -> Vec<f64> {
        self.log_softmax_row(s).iter().map(|l| l.exp()).collect()
    }

    /// The induced exact tabular policy (rows renormalized against float
    /// drift so downstream validation is exact).
    pub fn to_tabular(&self) -> TabularPolicy {
        TabularPolicy::from_weights(self.n_states, self.n_actions, |s, a| {
            self.action_probs(s)[a]
        })
        .expect("softmax rows are valid distributions")
    }
}

impl StochasticPolicy for SoftmaxPolicy {
    type State = usize;
    type Action = usize;

    fn n_params(&self) -> usize {
        self.theta.len()
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn log_prob(&self, s: &usize, a: &usize) -> f64 {
        assert!(*s < self.n_states && *a < self.n_actions, "index out of range");
        self.log_softmax_row(*s)[*a]
    }

    fn add_log_prob_grad(&self, s: &usize, a: &usize, coef: f64, grad: &mut [f64]) {
        assert_eq!(grad.len(), self.theta.len(), "gradient slice shape mismatch");
        let probs = self.action_probs(*s);
        let base = s * self.n_actions;
        for (b, p) in probs.iter().enumerate() {
            let indicator = if b == *a { 1.0 } else { 0.0 };
            grad[base + b] += coef * (indicator - p);
        }
    }

    fn sample_action(&self, s: &usize, rng: &mut ChaCha8Rng) -> usize {
        let probs = self.action_probs(*s);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.n_actions - 1
    }
}

/// Diagonal-Gaussian policy: a tanh MLP maps the state to the mean, and one
/// learnable log standard deviation per action dimension is carried at the
/// tail of the parameter vector. Actions are unsquashed; environments clip
/// them at their own boundary, which keeps the density and ratio computations
/// exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMlpPolicy {
    trunk: MlpShape,
    theta: Vec<f64>,
    action_dim: usize,
}

impl GaussianMlpPolicy {
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        init_log_std: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let trunk = MlpShape::new(state_dim, hidden, action_dim, Activation::Tanh);
        // Orthogonal trunk with a small-gain mean head keeps the initial
        // policy close to zero-mean before behavior cloning shapes it.
        let mut theta = init_mlp_params(&trunk, std::f64::consts::SQRT_2, 0.01, rng);
        theta.extend(std::iter::repeat_n(
            init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX),
            action_dim,
        ));
        Self {
            trunk,
            theta,
            action_dim,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn state_dim(&self) -> usize {
        self.trunk.input_dim()
    }

    pub fn trunk(&self) -> &MlpShape {
        &self.trunk
    }

    /// Index of the first log-std parameter inside the flat vector.
    pub fn log_std_offset(&self) -> usize {
        self.trunk.n_params()
    }

    pub fn mean(&self, s: &[f64]) -> Vec<f64> {
        self.trunk.forward(&self.theta[..self.trunk.n_params()], s)
    }

    pub fn log_stds(&self) -> &[f64] {
        &self.theta[self.trunk.n_params()..]
    }
}

impl StochasticPolicy for GaussianMlpPolicy {
    type State = Vec<f64>;
    type Action = Vec<f64>;

    fn n_params(&self) -> usize {
        self.theta.len()
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn log_prob(&self, s: &Vec<f64>, a: &Vec<f64>) -> f64 {
        assert_eq!(a.len(), self.action_dim, "action has wrong dimension");
        let mean = self.mean(s);
        let mut lp = 0.0;
        for k in 0..self.action_dim {
            let log_std = self.log_stds()[k];
            let std = log_std.exp();
            let z = (a[k] - mean[k]) / std;
            lp += -0.5 * z * z - log_std - HALF_LOG_2PI;
        }
        lp
    }

    fn add_log_prob_grad(&self, s: &Vec<f64>, a: &Vec<f64>, coef: f64, grad: &mut [f64]) {
        assert_eq!(grad.len(), self.theta.len(), "gradient slice shape mismatch");
        let trunk_params = &self.theta[..self.trunk.n_params()];
        let cache = self.trunk.forward_cached(trunk_params, s);
        let mean = cache.output();
        let mut upstream = vec![0.0; self.action_dim];
        let log_std_off = self.log_std_offset();
        for k in 0..self.action_dim {
            let log_std = self.theta[log_std_off + k];
            let std = log_std.exp();
            let z = (a[k] - mean[k]) / std;
            upstream[k] = z / std;
            grad[log_std_off + k] += coef * (z * z - 1.0);
        }
        self.trunk.backward(
            trunk_params,
            &cache,
            &upstream,
            coef,
            &mut grad[..log_std_off],
            None,
        );
    }

    fn sample_action(&self, s: &Vec<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mean = self.mean(s);
        (0..self.action_dim)
            .map(|k| {
                let noise: f64 = StandardNormal.sample(rng);
                mean[k] + self.log_stds()[k].exp() * noise
            })
            .collect()
    }

    fn project_params(&mut self) {
        let off = self.log_std_offset();
        for v in &mut self.theta[off..] {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }
}
