//! Clip schedule arithmetic and the clipped-surrogate loss surface.

use bppo_train::{bppo_loss, clip_ratio_schedule};
use mdp_core::substream;
use policy_models::{GaussianMlpPolicy, SoftmaxPolicy, StochasticPolicy};
use rand::Rng;

#[test]
fn schedule_decays_geometrically_then_freezes() {
    assert_eq!(clip_ratio_schedule(0.25, 0.96, 200, 0), 0.25);
    for i in 1..=200 {
        let prev = clip_ratio_schedule(0.25, 0.96, 200, i - 1);
        assert_eq!(clip_ratio_schedule(0.25, 0.96, 200, i), prev * 0.96);
    }
    let frozen = clip_ratio_schedule(0.25, 0.96, 200, 200);
    for i in [201, 350, 500, 10_000] {
        assert_eq!(clip_ratio_schedule(0.25, 0.96, 200, i), frozen);
    }
    for i in [0, 7, 200, 5000] {
        assert_eq!(clip_ratio_schedule(0.25, 1.0, 200, i), 0.25);
    }
}

#[test]
fn identical_policies_reduce_the_loss_to_negated_mean_advantage() {
    let pi = SoftmaxPolicy::from_logits(2, 3, vec![0.3, -0.1, 0.7, 0.0, 0.2, -0.4]);
    let states = vec![0usize, 0, 1, 1];
    let actions = vec![0usize, 2, 1, 0];
    let advantages = vec![1.5, -0.25, 0.75, -2.0];
    let out = bppo_loss(&pi, &pi.clone(), &states, &actions, &advantages, 0.1);
    let mean = advantages.iter().sum::<f64>() / 4.0;
    assert!((out.loss + mean).abs() <= 1e-15, "loss {}", out.loss);
    assert_eq!(out.dropped, 0);
}

#[test]
fn ratio_past_the_band_takes_the_clipped_value_and_no_gradient() {
    // One state, two actions. The learner moved the first action's
    // probability to 1.3x the snapshot's, past the 1 + 2*0.1 band edge.
    let snapshot = SoftmaxPolicy::from_logits(1, 2, vec![0.0, 0.0]);
    let learner = SoftmaxPolicy::from_logits(1, 2, vec![0.65f64.ln(), 0.35f64.ln()]);
    let out = bppo_loss(&learner, &snapshot, &[0], &[0], &[2.0], 0.1);
    assert!((out.loss - (-(1.2 * 2.0))).abs() <= 1e-12, "loss {}", out.loss);
    assert!(out.grad.iter().all(|&g| g == 0.0), "clipped sample leaked gradient");

    // A negative advantage on the same overgrown ratio sits on the unclipped
    // branch instead, so the gradient is live.
    let out = bppo_loss(&learner, &snapshot, &[0], &[0], &[-2.0], 0.1);
    assert!((out.loss - (1.3 * 2.0)).abs() <= 1e-12, "loss {}", out.loss);
    assert!(out.grad.iter().any(|&g| g != 0.0));
}

#[test]
fn per_sample_objective_never_exceeds_the_unclipped_surrogate() {
    let mut rng = substream(61, 0);
    for case in 0..50 {
        let base: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let moved: Vec<f64> = base.iter().map(|l| l + rng.random_range(-0.8..0.8)).collect();
        let snapshot = SoftmaxPolicy::from_logits(2, 3, base);
        let learner = SoftmaxPolicy::from_logits(2, 3, moved);
        let states: Vec<usize> = (0..8).map(|_| rng.random_range(0..2)).collect();
        let actions: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
        let advantages: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let eps = rng.random_range(0.01..0.3);
        let out = bppo_loss(&learner, &snapshot, &states, &actions, &advantages, eps);

        let unclipped_mean = states
            .iter()
            .zip(&actions)
            .zip(&advantages)
            .map(|((s, a), adv)| {
                (learner.log_prob(s, a) - snapshot.log_prob(s, a)).exp() * adv
            })
            .sum::<f64>()
            / 8.0;
        assert!(
            -out.loss <= unclipped_mean + 1e-12,
            "case {case}: surrogate {} above unclipped {}",
            -out.loss,
            unclipped_mean
        );
    }
}

#[test]
fn overflowing_ratios_are_dropped_and_counted() {
    // The snapshot is nearly certain of action 1, the learner is balanced,
    // so the ratio on action 0 overflows exp(~1599).
    let snapshot = SoftmaxPolicy::from_logits(1, 2, vec![-800.0, 800.0]);
    let learner = SoftmaxPolicy::from_logits(1, 2, vec![0.0, 0.0]);

    let out = bppo_loss(&learner, &snapshot, &[0, 0], &[0, 1], &[1.0, 1.0], 0.1);
    assert_eq!(out.dropped, 1);
    assert!(out.loss.is_finite(), "surviving sample should carry the batch");

    let out = bppo_loss(&learner, &snapshot, &[0], &[0], &[1.0], 0.1);
    assert_eq!(out.dropped, 1);
    assert!(out.loss.is_nan(), "an empty batch has no loss value");
}

fn fd_loss_check<P: StochasticPolicy + Clone>(
    mut learner: P,
    snapshot: &P,
    states: &[P::State],
    actions: &[P::Action],
    advantages: &[f64],
    eps: f64,
) -> f64 {
    let analytic = bppo_loss(&learner, snapshot, states, actions, advantages, eps).grad;
    let step = 1e-6;
    let mut worst = 0.0f64;
    for j in 0..learner.n_params() {
        let orig = learner.params()[j];
        learner.params_mut()[j] = orig + step;
        let up = bppo_loss(&learner, snapshot, states, actions, advantages, eps).loss;
        learner.params_mut()[j] = orig - step;
        let down = bppo_loss(&learner, snapshot, states, actions, advantages, eps).loss;
        learner.params_mut()[j] = orig;
        let numeric = (up - down) / (2.0 * step);
        let rel = (analytic[j] - numeric).abs() / analytic[j].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

/// Every sample's ratio must sit clear of both clip edges, far enough that
/// the finite-difference probes cannot cross a kink.
fn clear_of_kinks<P: StochasticPolicy>(
    learner: &P,
    snapshot: &P,
    states: &[P::State],
    actions: &[P::Action],
    eps: f64,
) -> bool {
    states.iter().zip(actions).all(|(s, a)| {
        let ratio = (learner.log_prob(s, a) - snapshot.log_prob(s, a)).exp();
        (ratio - (1.0 - 2.0 * eps)).abs() > 1e-3 && (ratio - (1.0 + 2.0 * eps)).abs() > 1e-3
    })
}

#[test]
fn softmax_loss_gradient_matches_finite_differences() {
    let eps = 0.1;
    let mut checked = 0;
    for attempt in 0..40u64 {
        let mut rng = substream(62, attempt);
        let base: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let moved: Vec<f64> = base.iter().map(|l| l + rng.random_range(-0.3..0.3)).collect();
        let snapshot = SoftmaxPolicy::from_logits(3, 3, base);
        let learner = SoftmaxPolicy::from_logits(3, 3, moved);
        let states: Vec<usize> = (0..12).map(|_| rng.random_range(0..3)).collect();
        let actions: Vec<usize> = (0..12).map(|_| rng.random_range(0..3)).collect();
        let advantages: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
        if !clear_of_kinks(&learner, &snapshot, &states, &actions, eps) {
            continue;
        }
        let worst = fd_loss_check(learner, &snapshot, &states, &actions, &advantages, eps);
        assert!(worst <= 1e-4, "attempt {attempt}: max rel err {worst:.3e}");
        checked += 1;
        if checked >= 10 {
            return;
        }
    }
    panic!("only {checked} kink-free probe configurations in 40 attempts");
}

#[test]
fn gaussian_loss_gradient_matches_finite_differences() {
    let eps = 0.1;
    let mut checked = 0;
    for attempt in 0..40u64 {
        let mut rng = substream(63, attempt);
        let mut snapshot = GaussianMlpPolicy::new(2, 2, &[6, 5], -0.5, &mut rng);
        let fresh: Vec<f64> = (0..snapshot.n_params())
            .map(|_| rng.random_range(-0.7..0.7))
            .collect();
        snapshot.params_mut().copy_from_slice(&fresh);
        let mut learner = snapshot.clone();
        for p in learner.params_mut() {
            *p += rng.random_range(-0.05..0.05);
        }
        let states: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let actions: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let advantages: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        if !clear_of_kinks(&learner, &snapshot, &states, &actions, eps) {
            continue;
        }
        let worst = fd_loss_check(learner, &snapshot, &states, &actions, &advantages, eps);
        assert!(worst <= 1e-4, "attempt {attempt}: max rel err {worst:.3e}");
        checked += 1;
        if checked >= 5 {
            return;
        }
    }
    panic!("only {checked} kink-free probe configurations in 40 attempts");
}
