//! Exact evaluation of the BPPO performance-difference identity and its
//! offline improvement bounds.
//!
//! Statement numbering follows the analysis published with behavior proximal
//! policy optimization (Zhuang et al., ICLR 2023). Theorem 1 is the
//! performance difference identity; theorem 2 lower-bounds true improvement
//! over the cloned behavior policy by the dataset surrogate minus two
//! penalties; theorem 3 extends that to improvement over a later iterate
//! pi_k, picking up a third penalty for the drift between pi_k and the
//! clone; theorem 4 bounds what replacing A_{pi_k} with the behavior
//! advantage costs the surrogate; the corollary chains theorems 3 and 4 into
//! a four-penalty bound around the replaced surrogate. Every quantity here
//! comes from exact solves on the tabular world, so a negative slack beyond
//! float noise is a genuine counterexample rather than estimation error.
//!
//! Expectations over occupancies are unnormalized weighted sums throughout,
//! matching the visitation-frequency convention where rho sums to
//! 1 / (1 - gamma). The penalty coefficients are evaluated exactly as the
//! statements print them; in particular the dataset term keeps its factor
//! 2 gamma against the 4 gamma of the policy terms, because the logged-action
//! mismatch enters through half of (1 - prob) while policy distances enter
//! through full total variation.

use mdp_core::{MdpError, TabularMdp, TabularPolicy};

use crate::enumerate::{discounted_pair_sum, truncation_depth};
use crate::occupancy::DatasetOccupancy;
use crate::report::{BoundReport, GapReport, IdentityReport, PerStateReport};

/// Relative tail budget for the trajectory-form enumeration inside
/// `verify_theorem1`. The budget scales with the natural magnitude of the
/// advantage sum so the identity check stays meaningful across reward scales.
const IDENTITY_TAIL_REL: f64 = 1e-12;

/// Checks the performance difference identity J(pi_new) - J(pi_old) =
/// E_{tau ~ pi_new}[sum_t gamma^t A_{pi_old}] = E_{rho_{pi_new}, pi_new}
/// [A_{pi_old}] along three independent routes: value solves, trajectory
/// enumeration, and a visitation solve.
pub fn verify_theorem1(
    mdp: &TabularMdp,
    pi_new: &TabularPolicy,
    pi_old: &TabularPolicy,
) -> Result<IdentityReport, MdpError> {
    let diff = mdp.performance_difference(pi_new, pi_old)?;
    let adv_old = mdp.exact_advantage(pi_old)?;
    let adv_bound = adv_old.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    let scale = (adv_bound / (1.0 - mdp.gamma())).max(1.0);
    let depth = truncation_depth(mdp.gamma(), adv_bound, IDENTITY_TAIL_REL * scale);
    let trajectory_form = discounted_pair_sum(mdp, pi_new, depth, |s, a| {
        adv_old[s * mdp.n_actions() + a]
    });
    Ok(IdentityReport::new(
        diff.direct,
        trajectory_form,
        diff.advantage_form,
    ))
}

/// Total variation between a point mass at a logged action and a policy row
/// assigning it `prob_logged`, evaluated as the defining integral split over
/// the logged branch and its complement without simplification. The branch
/// weight cancels, so any `logged_weight` in [0, 1] must give the same
/// number; `dataset_tv_divergence` holds the simplified closed form.
pub fn pointmass_tv_branch_sum(prob_logged: f64, logged_weight: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&prob_logged),
        "probability of the logged action must lie in [0, 1]"
    );
    assert!(
        (0.0..=1.0).contains(&logged_weight),
        "branch weight must lie in [0, 1]"
    );
    // On the logged branch the densities differ by 1 - prob; off it the point
    // mass is zero and the remaining policy mass is again 1 - prob.
    let on_logged = logged_weight * (1.0 - prob_logged);
    let off_logged = (1.0 - logged_weight) * (1.0 - prob_logged);
    0.5 * (on_logged + off_logged)
}

/// Evaluates the two-penalty improvement bound over the cloned behavior
/// policy: J_delta(pi, beta_hat) >= surrogate - 4 gamma A_max maxTV E_{rho_
/// beta_hat}[TV(pi||beta_hat)] - 2 gamma A_max maxTV E_{rho_D}[1 - beta_hat].
pub fn theorem2_bound(
    mdp: &TabularMdp,
    occupancy: &DatasetOccupancy,
    pi: &TabularPolicy,
    pi_beta_hat: &TabularPolicy,
) -> Result<BoundReport, MdpError> {
    let gamma = mdp.gamma();
    let adv = mdp.exact_advantage(pi_beta_hat)?;
    let a_max = max_abs(&adv);
    let max_tv = pi.max_tv(pi_beta_hat);
    let rho_beta = mdp.visitation_frequencies(pi_beta_hat)?;
    let expected_tv = weighted_tv(&rho_beta, pi, pi_beta_hat);
    let mismatch = occupancy.mismatch(pi_beta_hat);
    let surrogate = occupancy.expectation_under(pi, |s, a| adv[s * mdp.n_actions() + a]);
    let left = mdp.performance_difference(pi, pi_beta_hat)?.direct;
    Ok(BoundReport::lower_bound(
        "theorem2",
        left,
        surrogate,
        vec![
            4.0 * gamma * a_max * max_tv * expected_tv,
            2.0 * gamma * a_max * max_tv * mismatch,
        ],
        a_max,
        max_tv,
        expected_tv,
        mismatch,
    ))
}

/// Evaluates the three-penalty improvement bound over iterate `pi_k`; the
/// extra middle penalty charges for the drift between pi_k and the clone.
/// With pi_k equal to the clone that term vanishes and the report coincides
/// with `theorem2_bound` term for term.
pub fn theorem3_bound(
    mdp: &TabularMdp,
    occupancy: &DatasetOccupancy,
    pi: &TabularPolicy,
    pi_k: &TabularPolicy,
    pi_beta_hat: &TabularPolicy,
) -> Result<BoundReport, MdpError> {
    let gamma = mdp.gamma();
    let adv = mdp.exact_advantage(pi_k)?;
    let a_max = max_abs(&adv);
    let max_tv = pi.max_tv(pi_k);
    let rho_k = mdp.visitation_frequencies(pi_k)?;
    let expected_tv = weighted_tv(&rho_k, pi, pi_k);
    let rho_beta = mdp.visitation_frequencies(pi_beta_hat)?;
    let drift_tv = weighted_tv(&rho_beta, pi_k, pi_beta_hat);
    let mismatch = occupancy.mismatch(pi_beta_hat);
    let surrogate = occupancy.expectation_under(pi, |s, a| adv[s * mdp.n_actions() + a]);
    let left = mdp.performance_difference(pi, pi_k)?.direct;
    Ok(BoundReport::lower_bound(
        "theorem3",
        left,
        surrogate,
        vec![
            4.0 * gamma * a_max * max_tv * expected_tv,
            4.0 * gamma * a_max * max_tv * drift_tv,
            2.0 * gamma * a_max * max_tv * mismatch,
        ],
        a_max,
        max_tv,
        expected_tv,
        mismatch,
    ))
}

/// Bounds the advantage-replacement error: swapping A_{pi_k} for the true
/// behavior advantage inside the dataset surrogate moves it by at most
/// 2 gamma (gamma + 1) R_max E_{rho_beta}[TV(pi_k||beta)].
pub fn theorem4_gap(
    mdp: &TabularMdp,
    occupancy: &DatasetOccupancy,
    pi: &TabularPolicy,
    pi_k: &TabularPolicy,
    pi_beta: &TabularPolicy,
    r_max: f64,
) -> Result<GapReport, MdpError> {
    let gamma = mdp.gamma();
    let adv_k = mdp.exact_advantage(pi_k)?;
    let adv_beta = mdp.exact_advantage(pi_beta)?;
    let surrogate_k = occupancy.expectation_under(pi, |s, a| adv_k[s * mdp.n_actions() + a]);
    let surrogate_beta =
        occupancy.expectation_under(pi, |s, a| adv_beta[s * mdp.n_actions() + a]);
    let rho_beta = mdp.visitation_frequencies(pi_beta)?;
    let expected_tv = weighted_tv(&rho_beta, pi_k, pi_beta);
    let bound = 2.0 * gamma * (gamma + 1.0) * r_max * expected_tv;
    Ok(GapReport::new(
        "theorem4",
        (surrogate_k - surrogate_beta).abs(),
        bound,
        expected_tv,
    ))
}

/// Evaluates the combined four-penalty bound: true improvement over pi_k is
/// at least the replaced surrogate E_{rho_D, pi}[A_beta] minus the three
/// penalties of `theorem3_bound` minus the replacement constant of
/// `theorem4_gap`. The replacement constant uses the true behavior policy
/// and the reward bound; everything else references the clone.
pub fn corollary_bound(
    mdp: &TabularMdp,
    occupancy: &DatasetOccupancy,
    pi: &TabularPolicy,
    pi_k: &TabularPolicy,
    pi_beta_hat: &TabularPolicy,
    pi_beta: &TabularPolicy,
) -> Result<BoundReport, MdpError> {
    let gamma = mdp.gamma();
    let adv_k = mdp.exact_advantage(pi_k)?;
    let a_max = max_abs(&adv_k);
    let max_tv = pi.max_tv(pi_k);
    let rho_k = mdp.visitation_frequencies(pi_k)?;
    let expected_tv = weighted_tv(&rho_k, pi, pi_k);
    let rho_beta_hat = mdp.visitation_frequencies(pi_beta_hat)?;
    let drift_tv = weighted_tv(&rho_beta_hat, pi_k, pi_beta_hat);
    let mismatch = occupancy.mismatch(pi_beta_hat);
    let adv_beta = mdp.exact_advantage(pi_beta)?;
    let surrogate =
        occupancy.expectation_under(pi, |s, a| adv_beta[s * mdp.n_actions() + a]);
    let rho_beta = mdp.visitation_frequencies(pi_beta)?;
    let replacement_tv = weighted_tv(&rho_beta, pi_k, pi_beta);
    let replacement = 2.0 * gamma * (gamma + 1.0) * mdp.max_abs_reward() * replacement_tv;
    let left = mdp.performance_difference(pi, pi_k)?.direct;
    Ok(BoundReport::lower_bound(
        "corollary",
        left,
        surrogate,
        vec![
            4.0 * gamma * a_max * max_tv * expected_tv,
            4.0 * gamma * a_max * max_tv * drift_tv,
            2.0 * gamma * a_max * max_tv * mismatch,
            replacement,
        ],
        a_max,
        max_tv,
        expected_tv,
        mismatch,
    ))
}

/// Per-state check that the policy-averaged advantage is controlled by total
/// variation: |E_{a~pi}[A_{beta_hat}(s, a)]| <= 2 max_a |A_{beta_hat}(s, a)|
/// TV(pi||beta_hat)[s]. The left side is only nonzero because the averaging
/// policy differs from the advantage's own policy.
pub fn verify_lemma1(
    mdp: &TabularMdp,
    pi: &TabularPolicy,
    pi_beta_hat: &TabularPolicy,
) -> Result<PerStateReport, MdpError> {
    let adv = mdp.exact_advantage(pi_beta_hat)?;
    let n_actions = mdp.n_actions();
    let mut left = Vec::with_capacity(mdp.n_states());
    let mut right = Vec::with_capacity(mdp.n_states());
    for s in 0..mdp.n_states() {
        let row = &adv[s * n_actions..(s + 1) * n_actions];
        let averaged: f64 = row
            .iter()
            .enumerate()
            .map(|(a, adv)| pi.prob(s, a) * adv)
            .sum();
        let row_max = row.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
        left.push(averaged.abs());
        right.push(2.0 * row_max * pi.tv(pi_beta_hat, s));
    }
    Ok(PerStateReport::new("lemma1", left, right))
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn weighted_tv(rho: &[f64], pi: &TabularPolicy, reference: &TabularPolicy) -> f64 {
    rho.iter()
        .enumerate()
        .map(|(s, w)| w * pi.tv(reference, s))
        .sum()
}
