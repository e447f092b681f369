//! Randomized case batteries behind the `verify` subcommand.
//!
//! Each suite draws its cases from one purpose-keyed RNG stream, so a suite
//! of n cases is a prefix of the same suite at any larger n and reruns are
//! reproducible. Cases live in the regime where the bounds say something:
//! dense fast-mixing worlds, soft behavior policies, and candidates held
//! within a controlled total-variation radius of their reference.

use bppo_train::bppo_loss;
use mdp_core::{
    dataset_tv_divergence, perturbed_policy, random_mdp, random_policy, stream, substream,
    MdpError, RandomMdpSpec, TabularMdp, TabularPolicy,
};
use offline_data::generate_tabular;
use policy_models::{
    ActionValueModel, GaussianMlpPolicy, MlpQ, MlpV, SoftmaxPolicy, StateValueModel,
    StochasticPolicy,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    corollary_bound, pointmass_tv_branch_sum, theorem2_bound, theorem3_bound, theorem4_gap,
    verify_lemma1, verify_theorem1,
};
use crate::occupancy::DatasetOccupancy;
use crate::report::{BoundReport, GapReport, IdentityReport, PerStateReport};

/// Shape of one randomized bound case.
#[derive(Debug, Clone, Copy)]
pub struct CaseSpec {
    pub mdp: RandomMdpSpec,
    /// Uniform weight mixed into the behavior rows. Keeps every logged
    /// action's probability bounded away from zero, so the mismatch term
    /// stays informative rather than saturating.
    pub behavior_mix: f64,
    /// Episodes logged per case for the empirical occupancy.
    pub episodes: usize,
    /// Per-state total-variation radius for each perturbation step: pi_k
    /// sits within this radius of the behavior policy, pi within it of pi_k.
    pub max_tv: f64,
}

impl Default for CaseSpec {
    fn default() -> Self {
        Self {
            mdp: RandomMdpSpec::default(),
            behavior_mix: 0.3,
            episodes: 24,
            max_tv: 0.2,
        }
    }
}

/// One fully materialized bound case.
#[derive(Debug, Clone)]
pub struct BoundCase {
    pub mdp: TabularMdp,
    /// The logging policy; the batteries treat the behavior clone as exact,
    /// so this doubles as beta_hat.
    pub behavior: TabularPolicy,
    /// Empirical discounted occupancy of the episodes logged under
    /// `behavior`.
    pub occupancy: DatasetOccupancy,
    pub pi_k: TabularPolicy,
    pub pi: TabularPolicy,
}

/// Draws one case: a dense random world, a soft behavior policy, a logged
/// dataset, and a perturbation chain behavior -> pi_k -> pi.
pub fn random_bound_case(rng: &mut ChaCha8Rng, spec: &CaseSpec) -> BoundCase {
    let mdp = random_mdp(rng, &spec.mdp);
    let behavior = random_policy(
        rng,
        spec.mdp.n_states,
        spec.mdp.n_actions,
        spec.behavior_mix,
    );
    let data_seed: u64 = rng.random();
    let dataset = generate_tabular(
        &mdp,
        &behavior,
        spec.episodes,
        data_seed,
        "verify-battery",
        "logged-behavior",
    )
    .expect("battery datasets are nonempty by construction");
    let occupancy =
        DatasetOccupancy::from_dataset(&dataset, mdp.n_states(), mdp.n_actions(), mdp.gamma());
    let pi_k = perturbed_policy(rng, &behavior, spec.max_tv);
    let pi = perturbed_policy(rng, &pi_k, spec.max_tv);
    BoundCase {
        mdp,
        behavior,
        occupancy,
        pi_k,
        pi,
    }
}

/// Performance-difference identity on random worlds and policy pairs.
pub fn theorem1_suite(cases: usize, seed: u64) -> Result<Vec<IdentityReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = RandomMdpSpec::default();
    (0..cases)
        .map(|_| {
            let mdp = random_mdp(&mut rng, &spec);
            let pi_old = random_policy(&mut rng, spec.n_states, spec.n_actions, 0.0);
            let pi_new = random_policy(&mut rng, spec.n_states, spec.n_actions, 0.0);
            verify_theorem1(&mdp, &pi_new, &pi_old)
        })
        .collect()
}

/// Identity stress battery: two-action worlds with both policies pinned to
/// the corners of the simplex, one action at probability 1e-9 and the other
/// at its exact complement.
pub fn theorem1_adversarial_suite(
    cases: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = RandomMdpSpec {
        n_states: 4,
        n_actions: 2,
        ..RandomMdpSpec::default()
    };
    let lo = 1e-9;
    // The float complement of lo, so each row sums to exactly one.
    let hi = 1.0 - lo;
    let near_deterministic = |rng: &mut ChaCha8Rng| {
        let mut probs = Vec::with_capacity(spec.n_states * 2);
        for _ in 0..spec.n_states {
            if rng.random::<bool>() {
                probs.extend([hi, lo]);
            } else {
                probs.extend([lo, hi]);
            }
        }
        TabularPolicy::new(spec.n_states, 2, probs)
            .expect("corner rows sum to one by construction")
    };
    (0..cases)
        .map(|_| {
            let mdp = random_mdp(&mut rng, &spec);
            let pi_old = near_deterministic(&mut rng);
            let pi_new = near_deterministic(&mut rng);
            verify_theorem1(&mdp, &pi_new, &pi_old)
        })
        .collect()
}

/// One point-mass total-variation case: the closed form against the
/// two-branch evaluation of the defining integral.
#[derive(Debug, Clone, Copy)]
pub struct Prop1Case {
    /// Probability the policy assigns to the logged action.
    pub prob_logged: f64,
    pub closed_form: f64,
    pub branch_sum: f64,
    pub abs_error: f64,
}

/// Logged-action divergence: closed form versus branch-by-branch integral
/// on random policy rows and logged actions.
pub fn proposition1_suite(cases: usize, seed: u64) -> Vec<Prop1Case> {
    let mut rng = substream(seed, stream::VERIFY);
    (0..cases)
        .map(|_| {
            let n_actions = rng.random_range(2..=6);
            let row = random_policy(&mut rng, 1, n_actions, 0.0);
            let logged = rng.random_range(0..n_actions);
            let prob_logged = row.prob(0, logged);
            let logged_weight: f64 = rng.random();
            let closed_form = dataset_tv_divergence(prob_logged);
            let branch_sum = pointmass_tv_branch_sum(prob_logged, logged_weight);
            Prop1Case {
                prob_logged,
                closed_form,
                branch_sum,
                abs_error: (closed_form - branch_sum).abs(),
            }
        })
        .collect()
}

/// Two-penalty bound battery: candidates within `max_tv` of the behavior
/// clone.
pub fn theorem2_suite(
    cases: usize,
    seed: u64,
    max_tv: f64,
) -> Result<Vec<BoundReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = CaseSpec {
        max_tv,
        ..CaseSpec::default()
    };
    (0..cases)
        .map(|_| {
            let case = random_bound_case(&mut rng, &spec);
            // pi_k is the policy one perturbation step from the clone, which
            // is exactly the candidate this bound speaks about.
            theorem2_bound(&case.mdp, &case.occupancy, &case.pi_k, &case.behavior)
        })
        .collect()
}

/// Three-penalty bound battery over drifted iterates.
pub fn theorem3_suite(
    cases: usize,
    seed: u64,
    max_tv: f64,
) -> Result<Vec<BoundReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = CaseSpec {
        max_tv,
        ..CaseSpec::default()
    };
    (0..cases)
        .map(|_| {
            let case = random_bound_case(&mut rng, &spec);
            theorem3_bound(
                &case.mdp,
                &case.occupancy,
                &case.pi,
                &case.pi_k,
                &case.behavior,
            )
        })
        .collect()
}

/// Advantage-replacement gap battery.
pub fn theorem4_suite(cases: usize, seed: u64, max_tv: f64) -> Result<Vec<GapReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = CaseSpec {
        max_tv,
        ..CaseSpec::default()
    };
    (0..cases)
        .map(|_| {
            let case = random_bound_case(&mut rng, &spec);
            theorem4_gap(
                &case.mdp,
                &case.occupancy,
                &case.pi,
                &case.pi_k,
                &case.behavior,
                case.mdp.max_abs_reward(),
            )
        })
        .collect()
}

/// Combined four-penalty bound battery.
pub fn corollary_suite(
    cases: usize,
    seed: u64,
    max_tv: f64,
) -> Result<Vec<BoundReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = CaseSpec {
        max_tv,
        ..CaseSpec::default()
    };
    (0..cases)
        .map(|_| {
            let case = random_bound_case(&mut rng, &spec);
            corollary_bound(
                &case.mdp,
                &case.occupancy,
                &case.pi,
                &case.pi_k,
                &case.behavior,
                &case.behavior,
            )
        })
        .collect()
}

/// Per-state averaged-advantage battery.
pub fn lemma1_suite(
    cases: usize,
    seed: u64,
    max_tv: f64,
) -> Result<Vec<PerStateReport>, MdpError> {
    let mut rng = substream(seed, stream::VERIFY);
    let spec = CaseSpec {
        max_tv,
        ..CaseSpec::default()
    };
    (0..cases)
        .map(|_| {
            let case = random_bound_case(&mut rng, &spec);
            verify_lemma1(&case.mdp, &case.pi_k, &case.behavior)
        })
        .collect()
}

/// Median slack across a battery, for trust-radius sweeps.
pub fn median_slack(reports: &[BoundReport]) -> f64 {
    assert!(!reports.is_empty(), "median of an empty battery");
    let mut slacks: Vec<f64> = reports.iter().map(|r| r.slack).collect();
    slacks.sort_by(|a, b| a.total_cmp(b));
    let n = slacks.len();
    if n % 2 == 1 {
        slacks[n / 2]
    } else {
        0.5 * (slacks[n / 2 - 1] + slacks[n / 2])
    }
}

/// One gradient probe outcome.
#[derive(Debug, Clone, Copy)]
pub struct GradReport {
    pub name: &'static str,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GradReport {
    fn new(name: &'static str, max_rel_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            max_rel_error,
            tolerance,
            pass: max_rel_error <= tolerance,
        }
    }
}

/// Gradient battery: an analytically exact quadratic, then one probe per
/// training loss. Cloning likelihoods run on both policy families, the value
/// fits on their network heads, and the clipped surrogate is probed away
/// from its clamp boundaries.
pub fn gradient_suite(seed: u64) -> Vec<GradReport> {
    let mut rng = substream(seed, stream::VERIFY);
    let mut reports = Vec::with_capacity(6);

    let curvatures: Vec<f64> = (0..12).map(|_| rng.random_range(0.5..2.0)).collect();
    let params: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
    let quad = |theta: &[f64]| {
        let value = 0.5
            * theta
                .iter()
                .zip(&curvatures)
                .map(|(t, c)| c * t * t)
                .sum::<f64>();
        let grad = theta.iter().zip(&curvatures).map(|(t, c)| c * t).collect();
        (value, grad)
    };
    // Central differences of a quadratic are exact in real arithmetic; what
    // remains is rounding noise of order eps * |loss| / (2 * step), a few
    // parts in a billion at these magnitudes.
    let err = crate::gradcheck::check_gradients(quad, &params, 50, &mut rng);
    reports.push(GradReport::new("quadratic", err, 1e-7));

    let (n_states, n_actions) = (4, 3);
    let logits: Vec<f64> = (0..n_states * n_actions)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let template = SoftmaxPolicy::from_logits(n_states, n_actions, logits.clone());
    let batch: Vec<(usize, usize)> = (0..24)
        .map(|_| (rng.random_range(0..n_states), rng.random_range(0..n_actions)))
        .collect();
    let nll = |theta: &[f64]| {
        let mut pol = template.clone();
        pol.params_mut().copy_from_slice(theta);
        let coef = -1.0 / batch.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        let mut total = 0.0;
        for (s, a) in &batch {
            total += pol.log_prob(s, a);
            pol.add_log_prob_grad(s, a, coef, &mut grad);
        }
        (-total / batch.len() as f64, grad)
    };
    let err = crate::gradcheck::check_gradients(nll, &logits, 50, &mut rng);
    reports.push(GradReport::new("log-likelihood", err, 1e-4));

    let snapshot_logits: Vec<f64> = (0..n_states * n_actions)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let snapshot = SoftmaxPolicy::from_logits(n_states, n_actions, snapshot_logits.clone());
    let learner_logits: Vec<f64> = snapshot_logits
        .iter()
        .map(|l| l + rng.random_range(-0.05..0.05))
        .collect();
    let states: Vec<usize> = (0..20).map(|_| rng.random_range(0..n_states)).collect();
    let actions: Vec<usize> = (0..20).map(|_| rng.random_range(0..n_actions)).collect();
    let advantages: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
    // With logits this close the importance ratios stay well inside the
    // 1 +/- 2 eps band, so the min never switches branches near the probe.
    let eps = 0.25;
    let surrogate = |theta: &[f64]| {
        let mut pol = template.clone();
        pol.params_mut().copy_from_slice(theta);
        let out = bppo_loss(&pol, &snapshot, &states, &actions, &advantages, eps);
        (out.loss, out.grad)
    };
    let err = crate::gradcheck::check_gradients(surrogate, &learner_logits, 50, &mut rng);
    reports.push(GradReport::new("clipped-surrogate", err, 1e-4));

    let gauss_template = GaussianMlpPolicy::new(2, 2, &[8], -0.5, &mut rng);
    let gauss_batch: Vec<(Vec<f64>, Vec<f64>)> = (0..16)
        .map(|_| {
            let s = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let a = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            (s, a)
        })
        .collect();
    let gauss_nll = |theta: &[f64]| {
        let mut pol = gauss_template.clone();
        pol.params_mut().copy_from_slice(theta);
        let coef = -1.0 / gauss_batch.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        let mut total = 0.0;
        for (s, a) in &gauss_batch {
            total += pol.log_prob(s, a);
            pol.add_log_prob_grad(s, a, coef, &mut grad);
        }
        (-total / gauss_batch.len() as f64, grad)
    };
    let gauss_params = gauss_template.params().to_vec();
    let err = crate::gradcheck::check_gradients(gauss_nll, &gauss_params, 50, &mut rng);
    reports.push(GradReport::new("gaussian-log-likelihood", err, 1e-4));

    let q_template = MlpQ::new(2, 2, &[8], &mut rng);
    let q_batch: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..16)
        .map(|_| {
            let s = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let a = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            (s, a, rng.random_range(-1.0..1.0))
        })
        .collect();
    let q_loss = |theta: &[f64]| {
        let mut model = q_template.clone();
        model.params_mut().copy_from_slice(theta);
        let n = q_batch.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        let mut loss = 0.0;
        for (s, a, y) in &q_batch {
            let err = model.q_value(s, a) - y;
            loss += err * err;
            model.add_q_grad(s, a, 2.0 * err / n, &mut grad);
        }
        (loss / n, grad)
    };
    let q_params = q_template.params().to_vec();
    let err = crate::gradcheck::check_gradients(q_loss, &q_params, 50, &mut rng);
    reports.push(GradReport::new("q-td", err, 1e-4));

    let v_template = MlpV::new(2, &[8], &mut rng);
    let v_batch: Vec<(Vec<f64>, f64)> = (0..16)
        .map(|_| {
            let s = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            (s, rng.random_range(-1.0..1.0))
        })
        .collect();
    let v_loss = |theta: &[f64]| {
        let mut model = v_template.clone();
        model.params_mut().copy_from_slice(theta);
        let n = v_batch.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        let mut loss = 0.0;
        for (s, g) in &v_batch {
            let err = model.value(s) - g;
            loss += err * err;
            model.add_value_grad(s, 2.0 * err / n, &mut grad);
        }
        (loss / n, grad)
    };
    let v_params = v_template.params().to_vec();
    let err = crate::gradcheck::check_gradients(v_loss, &v_params, 50, &mut rng);
    reports.push(GradReport::new("v-mse", err, 1e-4));

    reports
}
