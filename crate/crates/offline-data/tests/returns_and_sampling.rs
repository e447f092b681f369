//! Return labeling against closed forms, and minibatch sampling statistics.

use mdp_core::substream;
use offline_data::{monte_carlo_returns, DataError, DatasetMeta, TabularDataset, Transition};
use rand::Rng;

fn meta() -> DatasetMeta {
    DatasetMeta {
        env: "grid".into(),
        behavior: "hand".into(),
        seed: 0,
        gamma: 0.9,
        created: 0,
    }
}

/// Builds one chained episode over dummy integer states.
fn episode(ep: usize, rewards: &[f64]) -> Vec<Transition<usize, usize>> {
    let n = rewards.len();
    rewards
        .iter()
        .enumerate()
        .map(|(t, &reward)| Transition {
            state: t,
            action: 0,
            reward,
            next_state: t + 1,
            done: false,
            timeout: t == n - 1,
            episode_id: ep,
            t,
        })
        .collect()
}

#[test]
fn half_discount_three_ones() {
    let ds = TabularDataset::new(meta(), episode(0, &[1.0, 1.0, 1.0])).unwrap();
    assert_eq!(monte_carlo_returns(&ds, 0.5), vec![1.75, 1.5, 1.0]);
}

#[test]
fn zero_rewards_label_zero() {
    let ds = TabularDataset::new(meta(), episode(0, &[0.0; 7])).unwrap();
    assert!(monte_carlo_returns(&ds, 0.9).iter().all(|&g| g == 0.0));
}

#[test]
fn labels_match_direct_sums_and_recursion() {
    let mut rng = substream(51, 0);
    let mut transitions = Vec::new();
    let mut lengths = Vec::new();
    for ep in 0..20 {
        let len = rng.random_range(1..40usize);
        let rewards: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        transitions.extend(episode(ep, &rewards));
        lengths.push(len);
    }
    let ds = TabularDataset::new(meta(), transitions).unwrap();
    let gamma = 0.93;
    let labels = monte_carlo_returns(&ds, gamma);

    for e in 0..ds.n_episodes() {
        let (start, end) = ds.episode_range(e);
        // Direct power sum at the episode head.
        let direct: f64 = (start..end)
            .map(|i| gamma.powi((i - start) as i32) * ds.transitions()[i].reward)
            .sum();
        assert!((labels[start] - direct).abs() <= 1e-12);
        // One-step recursion everywhere, and the bare reward at the end.
        for i in start..end - 1 {
            let lhs = labels[i];
            let rhs = ds.transitions()[i].reward + gamma * labels[i + 1];
            assert!((lhs - rhs).abs() <= 1e-10);
        }
        assert_eq!(labels[end - 1], ds.transitions()[end - 1].reward);
    }
}

#[test]
fn minibatches_are_reproducible_and_in_range() {
    let ds = TabularDataset::new(meta(), episode(0, &[1.0; 25])).unwrap();
    let a = ds.sample_indices(16, &mut substream(3, 0)).unwrap();
    let b = ds.sample_indices(16, &mut substream(3, 0)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|&i| i < ds.len()));
    let c = ds.sample_indices(16, &mut substream(4, 0)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn minibatch_size_bounds() {
    let ds = TabularDataset::new(meta(), episode(0, &[1.0; 10])).unwrap();
    assert!(matches!(
        ds.sample_indices(0, &mut substream(0, 0)),
        Err(DataError::Invalid(_))
    ));
    assert!(matches!(
        ds.sample_indices(11, &mut substream(0, 0)),
        Err(DataError::Invalid(_))
    ));
}

#[test]
fn sampling_is_uniform_over_items() {
    let ds = TabularDataset::new(meta(), episode(0, &[1.0; 10])).unwrap();
    let mut rng = substream(9, 0);
    let mut counts = [0usize; 10];
    let draws = 1_000_000;
    for _ in 0..(draws / 10) {
        for &i in &ds.sample_indices(10, &mut rng).unwrap() {
            counts[i] += 1;
        }
    }
    // SE of a relative frequency at p = 0.1 over 1e6 draws.
    let se = (0.1 * 0.9 / draws as f64).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        let freq = c as f64 / draws as f64;
        assert!(
            (freq - 0.1).abs() <= 3.0 * se,
            "item {i} frequency {freq} strays from uniform"
        );
    }
}
