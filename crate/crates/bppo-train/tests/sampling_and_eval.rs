//! Loss-batch assembly and policy evaluation on both world kinds.

use bppo_train::{
    evaluate_policy, ratio_trace, sample_loss_batch, ContinuousWorld, TabularWorld, TrainConfig,
};
use estimators::{normalize_advantages, AdvantageEstimator};
use mdp_core::{stream, substream, PointReach, TabularMdp, TabularPolicy};
use offline_data::{generate_tabular, TabularDataset};
use policy_models::{
    ActionValueModel, GaussianMlpPolicy, SoftmaxPolicy, StateValueModel, TableQ,
    TableV,
};

/// One state, three actions with distinct deterministic rewards.
fn bandit() -> TabularMdp {
    TabularMdp::new(
        1,
        3,
        vec![0.2, 1.0, 0.5],
        vec![1.0, 1.0, 1.0],
        vec![1.0],
        0.9,
        10,
    )
    .unwrap()
}

fn behavior_probs() -> Vec<f64> {
    vec![0.5, 0.2, 0.3]
}

fn exact_estimator(mdp: &TabularMdp, pi: &TabularPolicy, omega: f64) -> AdvantageEstimator<TableQ, TableV> {
    let mut q = TableQ::zeros(mdp.n_states(), mdp.n_actions());
    q.params_mut()
        .copy_from_slice(&mdp.exact_action_values(pi).unwrap());
    let mut v = TableV::zeros(mdp.n_states());
    v.params_mut()
        .copy_from_slice(&mdp.exact_state_values(pi).unwrap());
    AdvantageEstimator::new(q, v, omega)
}

fn bandit_dataset(n_episodes: usize) -> TabularDataset {
    let behavior = TabularPolicy::new(1, 3, behavior_probs()).unwrap();
    generate_tabular(&bandit(), &behavior, n_episodes, 17, "bandit", "hand").unwrap()
}

#[test]
fn batch_shape_follows_the_config() {
    let ds = bandit_dataset(20);
    let mdp = bandit();
    let behavior = TabularPolicy::new(1, 3, behavior_probs()).unwrap();
    let est = exact_estimator(&mdp, &behavior, 0.9);
    let pi_k = SoftmaxPolicy::new_uniform(1, 3);

    for (minibatch, m, want) in [(32, 1, 32), (32, 3, 96), (7, 4, 28)] {
        let cfg = TrainConfig {
            minibatch,
            actions_per_state: m,
            ..TrainConfig::default()
        };
        let batch = sample_loss_batch(&ds, &pi_k, &est, &cfg, &mut substream(70, 0)).unwrap();
        assert_eq!(batch.len(), want);
        assert_eq!(batch.actions.len(), want);
        assert_eq!(batch.advantages.len(), want);
        assert!(batch.actions.iter().all(|&a| a < 3));

        let n = batch.len() as f64;
        let mean = batch.advantages.iter().sum::<f64>() / n;
        let var = batch.advantages.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() <= 1e-10);
        assert!((var.sqrt() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sampled_actions_follow_the_snapshot_policy() {
    let ds = bandit_dataset(40);
    let mdp = bandit();
    let behavior = TabularPolicy::new(1, 3, behavior_probs()).unwrap();
    let est = exact_estimator(&mdp, &behavior, 0.9);
    // A snapshot that prefers the last action.
    let pi_k = SoftmaxPolicy::from_logits(1, 3, vec![0.1f64.ln(), 0.3f64.ln(), 0.6f64.ln()]);

    let cfg = TrainConfig {
        minibatch: 10_000,
        actions_per_state: 1,
        ..TrainConfig::default()
    };
    let batch = sample_loss_batch(&ds, &pi_k, &est, &cfg, &mut substream(71, 0)).unwrap();

    // Recover the raw weighted advantages for the sampled pairs and compare
    // their mean against the closed-form expectation under the snapshot.
    let raw: Vec<f64> = batch
        .states
        .iter()
        .zip(&batch.actions)
        .map(|(s, a)| est.weighted_advantage(s, a))
        .collect();
    let n = raw.len() as f64;
    let sample_mean = raw.iter().sum::<f64>() / n;
    let exact_mean: f64 = (0..3)
        .map(|a| pi_k.action_probs(0)[a] * est.weighted_advantage(&0, &a))
        .sum();
    let sample_var = raw.iter().map(|x| (x - sample_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (sample_var / n).sqrt();
    assert!(
        (sample_mean - exact_mean).abs() <= 3.0 * se,
        "sample mean {sample_mean:.6} vs exact {exact_mean:.6} (SE {se:.2e})"
    );

    // The batch labels are exactly the normalized raw advantages.
    let mut renormalized = raw;
    normalize_advantages(&mut renormalized).unwrap();
    for (got, want) in batch.advantages.iter().zip(&renormalized) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn tabular_evaluation_is_the_exact_linear_solve() {
    let mdp = bandit();
    let world = TabularWorld::new(bandit());
    let pi = SoftmaxPolicy::from_logits(1, 3, vec![0.2, -0.4, 1.1]);
    let j = evaluate_policy(&pi, &world, 10, &mut substream(72, 0)).unwrap();
    let exact = mdp.exact_return(&pi.to_tabular()).unwrap();
    assert_eq!(j.mean, exact);
    assert_eq!(j.std_error, 0.0);
}

#[test]
fn continuous_evaluation_is_reproducible_under_its_stream() {
    let world = ContinuousWorld::new(PointReach::new(7, 50), 0.99);
    let pi = GaussianMlpPolicy::new(2, 2, &[16, 16], -0.5, &mut substream(73, 0));
    let a = evaluate_policy(&pi, &world, 10, &mut substream(73, 1)).unwrap();
    let b = evaluate_policy(&pi, &world, 10, &mut substream(73, 1)).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert!(a.std_error > 0.0, "sampled evaluation should report spread");

    let c = evaluate_policy(&pi, &world, 10, &mut substream(73, 2)).unwrap();
    assert_ne!(a.mean.to_bits(), c.mean.to_bits());
}

#[test]
fn continuous_evaluation_matches_its_golden_value() {
    let world = ContinuousWorld::new(PointReach::new(7, 50), 0.99);
    let pi = GaussianMlpPolicy::new(2, 2, &[16, 16], -0.5, &mut substream(74, 0));
    let j = evaluate_policy(&pi, &world, 10, &mut substream(74, 1)).unwrap();
    let golden = -3.673_875_718_264_403_64e1;
    assert!(
        (j.mean - golden).abs() <= 1e-9,
        "drifted from golden: {:.17e}",
        j.mean
    );
}

#[test]
fn identical_policies_give_unit_ratios_everywhere() {
    let ds = bandit_dataset(10);
    let pi = SoftmaxPolicy::from_logits(1, 3, vec![0.4, 0.1, -0.2]);
    let summary = ratio_trace(&pi, &pi.clone(), &ds, 0.05, &mut substream(75, stream::RATIO));
    assert_eq!(summary.mean_abs_deviation, 0.0);
    assert_eq!(summary.in_band_fraction, 1.0);
    assert_eq!(summary.samples, ds.len());
    assert_eq!(summary.dropped, 0);
}
