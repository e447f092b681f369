//! Discounted occupancy measures used on the certifying side of the bounds.
//!
//! The bounds weight their expectations by rho_D, the discounted visitation
//! of the logged data. Nothing here is estimated: the empirical constructor
//! reads the occupancy straight off the episode records in closed form, and
//! the policy constructor solves for the idealized occupancy a behavior
//! policy would induce. Both store per-pair weights so the same object serves
//! state expectations, resampled-action expectations, and the logged-action
//! mismatch term.

use mdp_core::{MdpError, TabularMdp, TabularPolicy};
use offline_data::TabularDataset;

/// Unnormalized discounted state-action occupancy, indexed `s * A + a`.
///
/// Weights sum to at most 1 / (1 - gamma); the empirical form falls short of
/// that by exactly the discount mass its finite episodes never reach.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOccupancy {
    n_states: usize,
    n_actions: usize,
    weights: Vec<f64>,
}

impl DatasetOccupancy {
    /// Exact occupancy of the logged episodes: each transition contributes
    /// gamma^t / n_episodes at its state-action pair.
    pub fn from_dataset(
        dataset: &TabularDataset,
        n_states: usize,
        n_actions: usize,
        gamma: f64,
    ) -> Self {
        assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
        let mut weights = vec![0.0; n_states * n_actions];
        let scale = 1.0 / dataset.n_episodes() as f64;
        for e in 0..dataset.n_episodes() {
            // gamma^t by running product, advanced to each transition's own
            // timestep; the container only guarantees t increases, not that
            // it is gap-free.
            let mut discount = scale;
            let mut reached = 0;
            for tr in dataset.episode(e) {
                assert!(
                    tr.state < n_states && tr.action < n_actions,
                    "transition ({}, {}) lies outside a {} x {} world",
                    tr.state,
                    tr.action,
                    n_states,
                    n_actions
                );
                while reached < tr.t {
                    discount *= gamma;
                    reached += 1;
                }
                weights[tr.state * n_actions + tr.action] += discount;
            }
        }
        Self {
            n_states,
            n_actions,
            weights,
        }
    }

    /// Idealized occupancy of `pi` on `mdp`: the visitation frequencies from
    /// the linear solve, split across actions by the policy.
    pub fn from_policy(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<Self, MdpError> {
        let rho = mdp.visitation_frequencies(pi)?;
        let (n_states, n_actions) = (mdp.n_states(), mdp.n_actions());
        let mut weights = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            for a in 0..n_actions {
                weights[s * n_actions + a] = rho[s] * pi.prob(s, a);
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            weights,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn pair_weight(&self, s: usize, a: usize) -> f64 {
        self.weights[s * self.n_actions + a]
    }

    /// rho_D(s): total weight across actions at `s`.
    pub fn state_weight(&self, s: usize) -> f64 {
        self.weights[s * self.n_actions..(s + 1) * self.n_actions]
            .iter()
            .sum()
    }

    pub fn state_weights(&self) -> Vec<f64> {
        (0..self.n_states).map(|s| self.state_weight(s)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Occupancy-weighted expectation with actions resampled from `pi`:
    /// sum_s rho_D(s) sum_a pi(a|s) f(s, a).
    pub fn expectation_under<F>(&self, pi: &TabularPolicy, f: F) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        assert_eq!(
            (pi.n_states(), pi.n_actions()),
            (self.n_states, self.n_actions),
            "policy shape does not match the occupancy"
        );
        let mut total = 0.0;
        for s in 0..self.n_states {
            let w = self.state_weight(s);
            if w == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for a in 0..self.n_actions {
                inner += pi.prob(s, a) * f(s, a);
            }
            total += w * inner;
        }
        total
    }

    /// Occupancy-weighted expectation of 1 - pi(a|s) at the logged pairs.
    /// This is the dataset-mismatch term the bounds charge for actions the
    /// reference policy would rarely have taken.
    pub fn mismatch(&self, pi: &TabularPolicy) -> f64 {
        assert_eq!(
            (pi.n_states(), pi.n_actions()),
            (self.n_states, self.n_actions),
            "policy shape does not match the occupancy"
        );
        let mut total = 0.0;
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let w = self.weights[s * self.n_actions + a];
                if w == 0.0 {
                    continue;
                }
                total += w * (1.0 - pi.prob(s, a));
            }
        }
        total
    }
}
