//! State-value and action-value approximators: exact tables for finite
//! worlds, ReLU MLP heads for continuous ones.

use crate::init::init_mlp_params;
use crate::mlp::{Activation, MlpShape};

/// V(s) with analytic parameter gradients.
pub trait StateValueModel {
    type State: Clone + std::fmt::Debug;

    fn n_params(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn value(&self, s: &Self::State) -> f64;
    /// Accumulates `coef * d value(s) / d theta` into `grad`.
    fn add_value_grad(&self, s: &Self::State, coef: f64, grad: &mut [f64]);
}

/// Q(s, a) with analytic parameter gradients.
pub trait ActionValueModel {
    type State: Clone + std::fmt::Debug;
    type Action: Clone + std::fmt::Debug;

    fn n_params(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn q_value(&self, s: &Self::State, a: &Self::Action) -> f64;
    fn add_q_grad(&self, s: &Self::State, a: &Self::Action, coef: f64, grad: &mut [f64]);
}

/// Exact per-state value table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableV {
    theta: Vec<f64>,
}

impl TableV {
    pub fn zeros(n_states: usize) -> Self {
        assert!(n_states > 0, "state count must be positive");
        Self {
            theta: vec![0.0; n_states],
        }
    }
}

impl StateValueModel for TableV {
    type State = usize;

    fn n_params(&self) -> usize {
        self.theta.len()
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn value(&self, s: &usize) -> f64 {
        self.theta[*s]
    }

    fn add_value_grad(&self, s: &usize, coef: f64, grad: &mut [f64]) {
        grad[*s] += coef;
    }
}

/// Exact per-(state, action) value table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableQ {
    n_states: usize,
    n_actions: usize,
    theta: Vec<f64>,
}

impl TableQ {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states > 0 && n_actions > 0, "shape must be positive");
        Self {
            n_states,
            n_actions,
            theta: vec![0.0; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
}

impl ActionValueModel for TableQ {
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

    fn q_value(&self, s: &usize, a: &usize) -> f64 {
        self.theta[s * self.n_actions + a]
    }

    fn add_q_grad(&self, s: &usize, a: &usize, coef: f64, grad: &mut [f64]) {
        grad[s * self.n_actions + a] += coef;
    }
}

/// ReLU MLP state-value head.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpV {
    shape: MlpShape,
    theta: Vec<f64>,
}

impl MlpV {
    pub fn new(state_dim: usize, hidden: &[usize], rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let shape = MlpShape::new(state_dim, hidden, 1, Activation::Relu);
        let theta = init_mlp_params(&shape, std::f64::consts::SQRT_2, 1.0, rng);
        Self { shape, theta }
    }

    pub fn shape(&self) -> &MlpShape {
        &self.shape
    }
}

impl StateValueModel for MlpV {
    type State = Vec<f64>;

    fn n_params(&self) -> usize {
        self.theta.len()
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn value(&self, s: &Vec<f64>) -> f64 {
        self.shape.forward(&self.theta, s)[0]
    }

    fn add_value_grad(&self, s: &Vec<f64>, coef: f64, grad: &mut [f64]) {
        let cache = self.shape.forward_cached(&self.theta, s);
        self.shape
            .backward(&self.theta, &cache, &[1.0], coef, grad, None);
    }
}

/// ReLU MLP action-value head over the concatenated (state, action) input.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpQ {
    shape: MlpShape,
    theta: Vec<f64>,
    state_dim: usize,
    action_dim: usize,
}

impl MlpQ {
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        let shape = MlpShape::new(state_dim + action_dim, hidden, 1, Activation::Relu);
        let theta = init_mlp_params(&shape, std::f64::consts::SQRT_2, 1.0, rng);
        Self {
            shape,
            theta,
            state_dim,
            action_dim,
        }
    }

    pub fn shape(&self) -> &MlpShape {
        &self.shape
    }

    fn concat(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        assert_eq!(s.len(), self.state_dim, "state has wrong dimension");
        assert_eq!(a.len(), self.action_dim, "action has wrong dimension");
        let mut x = Vec::with_capacity(self.state_dim + self.action_dim);
        x.extend_from_slice(s);
        x.extend_from_slice(a);
        x
    }
}

impl ActionValueModel for MlpQ {
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

    fn q_value(&self, s: &Vec<f64>, a: &Vec<f64>) -> f64 {
        self.shape.forward(&self.theta, &self.concat(s, a))[0]
    }

    fn add_q_grad(&self, s: &Vec<f64>, a: &Vec<f64>, coef: f64, grad: &mut [f64]) {
        let x = self.concat(s, a);
        let cache = self.shape.forward_cached(&self.theta, &x);
        self.shape
            .backward(&self.theta, &cache, &[1.0], coef, grad, None);
    }
}

/// Soft target-network update: target <- (1 - tau) * target + tau * online.
pub fn polyak_update(target: &mut [f64], online: &[f64], tau: f64) {
    assert_eq!(target.len(), online.len(), "parameter count mismatch");
    assert!((0.0..=1.0).contains(&tau), "tau must lie in [0, 1]");
    for (t, o) in target.iter_mut().zip(online) {
        *t = (1.0 - tau) * *t + tau * o;
    }
}
