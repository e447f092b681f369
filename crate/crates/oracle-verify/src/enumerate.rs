//! Return evaluation by trajectory enumeration.
//!
//! This is the independent oracle for `TabularMdp::exact_return`: instead of
//! solving a linear system it expands the trajectory tree breadth first and
//! accumulates the discounted payoff depth by depth. Branches that meet at
//! the same state at the same depth are merged, which loses nothing because
//! both the payoff and the successor law depend only on the current state.
//! The truncation depth is chosen from the requested tolerance, so agreement
//! between the two routes checks the solver and the enumerator against each
//! other with no shared code path.

use mdp_core::{TabularMdp, TabularPolicy};

/// Expected discounted return of `pi`, within `tolerance` of the exact value.
///
/// The enumeration is cut at the first depth whose remaining tail is provably
/// below half the tolerance, leaving the other half as headroom for float
/// accumulation. A zero reward table short-circuits to exactly zero.
pub fn brute_force_return(mdp: &TabularMdp, pi: &TabularPolicy, tolerance: f64) -> f64 {
    assert!(
        tolerance.is_finite() && tolerance > 0.0,
        "tolerance must be positive and finite, got {tolerance}"
    );
    let payoff_bound = mdp.max_abs_reward();
    if payoff_bound == 0.0 {
        return 0.0;
    }
    let depth = truncation_depth(mdp.gamma(), payoff_bound, 0.5 * tolerance);
    discounted_pair_sum(mdp, pi, depth, |s, a| mdp.reward(s, a))
}

/// Expected discounted sum of f(s_t, a_t) over trajectories of `pi`, summed
/// exactly up to and including `depth`.
///
/// Maintains the state distribution at each depth and pushes it forward one
/// step at a time, so the cost is depth * |S|^2 * |A| regardless of how many
/// raw trajectories the tree holds.
pub(crate) fn discounted_pair_sum<F>(
    mdp: &TabularMdp,
    pi: &TabularPolicy,
    depth: usize,
    f: F,
) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    let n = mdp.n_states();
    let mut dist = mdp.initial_dist().to_vec();
    let mut next = vec![0.0; n];
    let mut discount = 1.0;
    let mut total = 0.0;
    for t in 0..=depth {
        for s in 0..n {
            if dist[s] == 0.0 {
                continue;
            }
            let mut payoff = 0.0;
            for a in 0..mdp.n_actions() {
                payoff += pi.prob(s, a) * f(s, a);
            }
            total += discount * dist[s] * payoff;
        }
        if t == depth {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..n {
            if dist[s] == 0.0 {
                continue;
            }
            for a in 0..mdp.n_actions() {
                let w = dist[s] * pi.prob(s, a);
                if w == 0.0 {
                    continue;
                }
                for (s2, p) in mdp.transition_row(s, a).iter().enumerate() {
                    next[s2] += w * p;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
        discount *= mdp.gamma();
    }
    total
}

/// Smallest depth T such that the discarded tail sum_{t>T} gamma^t * bound is
/// at most `budget`, that is gamma^(T+1) * bound / (1 - gamma) <= budget.
pub(crate) fn truncation_depth(gamma: f64, payoff_bound: f64, budget: f64) -> usize {
    assert!(budget > 0.0, "tail budget must be positive");
    if gamma == 0.0 || payoff_bound == 0.0 {
        return 0;
    }
    let target = budget * (1.0 - gamma) / payoff_bound;
    if target >= 1.0 {
        return 0;
    }
    let steps = (target.ln() / gamma.ln()).ceil() as usize;
    steps.saturating_sub(1)
}
