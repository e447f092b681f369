//! Advantage queries, asymmetric reweighting, and batch normalization.

use policy_models::{ActionValueModel, StateValueModel};

use crate::error::EstimatorError;

/// A = Q(s, a) - V(s) over fitted models. Both models generalize off the
/// dataset, so the advantage is defined for any action in the domain, not
/// just logged ones.
#[derive(Debug, Clone)]
pub struct AdvantageEstimator<Q, V> {
    pub q: Q,
    pub v: V,
    /// Asymmetric coefficient: positives scale by omega, negatives by
    /// 1 - omega.
    pub omega: f64,
}

impl<Q, V> AdvantageEstimator<Q, V>
where
    Q: ActionValueModel,
    V: StateValueModel<State = Q::State>,
{
    pub fn new(q: Q, v: V, omega: f64) -> Self {
        assert!(
            omega > 0.0 && omega < 1.0,
            "asymmetric coefficient must lie strictly inside (0, 1)"
        );
        Self { q, v, omega }
    }

    pub fn advantage(&self, s: &Q::State, a: &Q::Action) -> f64 {
        self.q.q_value(s, a) - self.v.value(s)
    }

    pub fn weighted_advantage(&self, s: &Q::State, a: &Q::Action) -> f64 {
        asymmetric_weight(self.advantage(s, a), self.omega)
    }
}

/// |omega - 1(A < 0)| * A: keeps the sign, scales gains by omega and losses
/// by 1 - omega. At omega = 0.5 this is a uniform halving.
pub fn asymmetric_weight(a: f64, omega: f64) -> f64 {
    let indicator = if a < 0.0 { 1.0 } else { 0.0 };
    (omega - indicator).abs() * a
}

/// Shifts and scales the batch to mean 0 and standard deviation 1, with the
/// std computed over n. The divisor is floored at 1e-8, so a spread-free
/// batch maps to zeros instead of blowing up.
pub fn normalize_advantages(batch: &mut [f64]) -> Result<(), EstimatorError> {
    if batch.len() < 2 {
        return Err(EstimatorError::ShortBatch(batch.len()));
    }
    let n = batch.len() as f64;
    let mean = batch.iter().sum::<f64>() / n;
    let var = batch.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let denom = var.sqrt().max(1e-8);
    for a in batch.iter_mut() {
        *a = (*a - mean) / denom;
    }
    Ok(())
}
