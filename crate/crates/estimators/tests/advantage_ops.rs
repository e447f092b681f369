//! Advantage assembly, asymmetric weighting, and batch normalization.

use estimators::{asymmetric_weight, normalize_advantages, AdvantageEstimator, EstimatorError};
use mdp_core::{random_mdp, random_policy, substream, RandomMdpSpec};
use policy_models::{ActionValueModel, MlpQ, MlpV, StateValueModel, TableQ, TableV};
use proptest::prelude::*;
use rand::Rng;

fn exact_tables() -> (TableQ, TableV, Vec<f64>, usize, usize) {
    let spec = RandomMdpSpec::default();
    let mut rng = substream(41, 0);
    let mdp = random_mdp(&mut rng, &spec);
    let pi = random_policy(&mut rng, spec.n_states, spec.n_actions, 0.2);

    let mut q = TableQ::zeros(spec.n_states, spec.n_actions);
    q.params_mut()
        .copy_from_slice(&mdp.exact_action_values(&pi).unwrap());
    let mut v = TableV::zeros(spec.n_states);
    v.params_mut().copy_from_slice(&mdp.exact_state_values(&pi).unwrap());
    let adv = mdp.exact_advantage(&pi).unwrap();
    (q, v, adv, spec.n_states, spec.n_actions)
}

#[test]
fn exact_tables_reproduce_the_exact_advantage() {
    let (q, v, adv, n_states, n_actions) = exact_tables();
    let est = AdvantageEstimator::new(q, v, 0.9);
    for s in 0..n_states {
        for a in 0..n_actions {
            let got = est.advantage(&s, &a);
            let want = adv[s * n_actions + a];
            assert!((got - want).abs() <= 1e-6, "A({s},{a}) = {got}, want {want}");
        }
    }
}

#[test]
fn matching_q_and_v_give_identically_zero_advantage() {
    let mut rng = substream(42, 0);
    let mut q = TableQ::zeros(4, 3);
    let mut v = TableV::zeros(4);
    for s in 0..4 {
        let value: f64 = rng.random_range(-5.0..5.0);
        v.params_mut()[s] = value;
        for a in 0..3 {
            q.params_mut()[s * 3 + a] = value;
        }
    }
    let est = AdvantageEstimator::new(q, v, 0.7);
    for s in 0..4usize {
        for a in 0..3usize {
            assert_eq!(est.advantage(&s, &a), 0.0);
            assert_eq!(est.weighted_advantage(&s, &a), 0.0);
        }
    }
}

#[test]
fn network_estimator_answers_arbitrary_queries() {
    let q = MlpQ::new(2, 2, &[8, 8], &mut substream(43, 0));
    let v = MlpV::new(2, &[8, 8], &mut substream(43, 1));
    let est = AdvantageEstimator::new(q, v, 0.9);
    let mut rng = substream(43, 2);
    for _ in 0..100 {
        let s: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let adv = est.advantage(&s, &a);
        let weighted = est.weighted_advantage(&s, &a);
        assert!(adv.is_finite());
        assert!(weighted.is_finite());
        assert!(weighted * adv >= 0.0, "weighting flipped the sign");
        assert!(weighted.abs() <= 0.9f64.max(0.1) * adv.abs() + 1e-15);
    }
}

#[test]
fn weighting_keeps_gains_and_shrinks_losses() {
    assert_eq!(asymmetric_weight(2.0, 0.9), 1.8);
    assert!((asymmetric_weight(-2.0, 0.9) - (-0.2)).abs() <= 1e-15);
    assert_eq!(asymmetric_weight(0.0, 0.9), 0.0);
    // The balanced setting halves both sides.
    assert_eq!(asymmetric_weight(3.0, 0.5), 1.5);
    assert_eq!(asymmetric_weight(-3.0, 0.5), -1.5);
}

#[test]
#[should_panic(expected = "coefficient")]
fn omega_zero_is_rejected() {
    let _ = AdvantageEstimator::new(TableQ::zeros(1, 1), TableV::zeros(1), 0.0);
}

#[test]
#[should_panic(expected = "coefficient")]
fn omega_one_is_rejected() {
    let _ = AdvantageEstimator::new(TableQ::zeros(1, 1), TableV::zeros(1), 1.0);
}

#[test]
fn sign_balanced_pair_is_already_normalized() {
    let mut batch = vec![1.0, -1.0];
    normalize_advantages(&mut batch).unwrap();
    assert_eq!(batch, vec![1.0, -1.0]);
}

#[test]
fn constant_batches_collapse_to_zero() {
    let mut batch = vec![3.25; 17];
    normalize_advantages(&mut batch).unwrap();
    assert!(batch.iter().all(|&x| x == 0.0));
}

#[test]
fn normalized_batches_have_unit_scale() {
    let mut rng = substream(44, 0);
    let mut batch: Vec<f64> = (0..257).map(|_| rng.random_range(-4.0..9.0)).collect();
    normalize_advantages(&mut batch).unwrap();
    let n = batch.len() as f64;
    let mean = batch.iter().sum::<f64>() / n;
    let var = batch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() <= 1e-10, "mean {mean:e}");
    assert!((var.sqrt() - 1.0).abs() <= 1e-10, "std {}", var.sqrt());
}

#[test]
fn tiny_batches_are_rejected() {
    assert!(matches!(
        normalize_advantages(&mut []),
        Err(EstimatorError::ShortBatch(0))
    ));
    assert!(matches!(
        normalize_advantages(&mut [1.0]),
        Err(EstimatorError::ShortBatch(1))
    ));
}

proptest! {
    #[test]
    fn weighting_is_positively_homogeneous(
        a in -50.0f64..50.0,
        omega in 0.05f64..0.95,
        scale in 0.01f64..100.0,
    ) {
        let lhs = asymmetric_weight(scale * a, omega);
        let rhs = scale * asymmetric_weight(a, omega);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        prop_assert!(asymmetric_weight(a, omega) * a >= 0.0);
    }

    #[test]
    fn normalization_centers_any_spread_batch(
        mut batch in proptest::collection::vec(-100.0f64..100.0, 2..50)
    ) {
        let n = batch.len() as f64;
        let mean0 = batch.iter().sum::<f64>() / n;
        let var0 = batch.iter().map(|x| (x - mean0).powi(2)).sum::<f64>() / n;
        normalize_advantages(&mut batch).unwrap();
        let mean = batch.iter().sum::<f64>() / n;
        let var = batch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        prop_assert!(mean.abs() <= 1e-9);
        if var0.sqrt() >= 1e-8 {
            prop_assert!((var.sqrt() - 1.0).abs() <= 1e-9);
        }
    }
}
