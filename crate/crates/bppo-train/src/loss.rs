use policy_models::StochasticPolicy;

/// Value and policy gradient of the clipped surrogate on one batch.
#[derive(Debug, Clone)]
pub struct LossOutput {
    /// Negated mean of the per-sample surrogate objective.
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Samples whose importance ratio came out non-finite and were excluded.
    pub dropped: usize,
}

/// Clipped-surrogate loss over (state, action, advantage) samples with the
/// snapshot policy frozen.
///
/// Per sample the objective is min(ratio * adv, clamp(ratio, 1-2eps, 1+2eps)
/// * adv) with ratio = exp(log pi(a|s) - log pi_k(a|s)), and the loss is the
/// negated batch mean. Gradients flow only through `pi`: a sample contributes
/// -adv * ratio * grad log pi(a|s) when the unclipped branch attains the min
/// (ties included), and nothing when the clipped branch wins, which is what
/// zeroes the pull on samples that already left the trust band in the
/// profitable direction.
pub fn bppo_loss<P: StochasticPolicy>(
    pi: &P,
    pi_k: &P,
    states: &[P::State],
    actions: &[P::Action],
    advantages: &[f64],
    eps: f64,
) -> LossOutput {
    assert_eq!(states.len(), actions.len(), "batch fields must align");
    assert_eq!(states.len(), advantages.len(), "batch fields must align");
    assert!(!states.is_empty(), "surrogate batch must be nonempty");
    assert!(eps > 0.0, "clip ratio must be positive");

    let lo = 1.0 - 2.0 * eps;
    let hi = 1.0 + 2.0 * eps;
    let mut grad = vec![0.0; pi.n_params()];
    let mut objective_sum = 0.0;
    let mut dropped = 0usize;
    let mut active = Vec::with_capacity(states.len());

    for ((s, a), &adv) in states.iter().zip(actions).zip(advantages) {
        let ratio = (pi.log_prob(s, a) - pi_k.log_prob(s, a)).exp();
        if !ratio.is_finite() {
            dropped += 1;
            continue;
        }
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(lo, hi) * adv;
        objective_sum += unclipped.min(clipped);
        if unclipped <= clipped {
            active.push((s, a, adv, ratio));
        }
    }

    let kept = states.len() - dropped;
    if kept == 0 {
        return LossOutput {
            loss: f64::NAN,
            grad,
            dropped,
        };
    }
    let n = kept as f64;
    for (s, a, adv, ratio) in active {
        pi.add_log_prob_grad(s, a, -adv * ratio / n, &mut grad);
    }
    LossOutput {
        loss: -objective_sum / n,
        grad,
        dropped,
    }
}
