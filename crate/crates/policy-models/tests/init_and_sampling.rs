//! Orthogonal-initialization geometry and sampling statistics.

use mdp_core::substream;
use policy_models::{orthogonal_matrix, GaussianMlpPolicy, SoftmaxPolicy, StochasticPolicy};

fn gram_columns(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut g = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut dot = 0.0;
            for r in 0..rows {
                dot += w[r * cols + i] * w[r * cols + j];
            }
            g[i * cols + j] = dot;
        }
    }
    g
}

fn assert_scaled_identity(g: &[f64], n: usize, scale: f64, tol: f64, label: &str) {
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { scale } else { 0.0 };
            assert!(
                (g[i * n + j] - expect).abs() < tol,
                "{label}: gram[{i},{j}] = {} want {expect}",
                g[i * n + j]
            );
        }
    }
}

#[test]
fn square_orthogonal_has_identity_gram() {
    let mut rng = substream(111, 0);
    let w = orthogonal_matrix(4, 4, 1.0, &mut rng);
    assert_scaled_identity(&gram_columns(&w, 4, 4), 4, 1.0, 1e-8, "4x4 gain 1");
}

#[test]
fn tall_orthogonal_columns_scale_with_gain() {
    let mut rng = substream(112, 0);
    let gain = std::f64::consts::SQRT_2;
    let w = orthogonal_matrix(8, 4, gain, &mut rng);
    assert_scaled_identity(&gram_columns(&w, 8, 4), 4, 2.0, 1e-8, "8x4 gain sqrt2");
}

#[test]
fn wide_orthogonal_rows_are_orthonormal() {
    let mut rng = substream(113, 0);
    let w = orthogonal_matrix(3, 7, 1.0, &mut rng);
    // Rows orthonormal: W W^T = I.
    let mut g = vec![0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            for c in 0..7 {
                g[i * 3 + j] += w[i * 7 + c] * w[j * 7 + c];
            }
        }
    }
    assert_scaled_identity(&g, 3, 1.0, 1e-8, "3x7 rows");
}

#[test]
fn zero_gain_gives_zero_matrix() {
    let mut rng = substream(114, 0);
    let w = orthogonal_matrix(5, 5, 0.0, &mut rng);
    assert!(w.iter().all(|x| *x == 0.0));
}

#[test]
fn different_draws_differ() {
    let mut rng = substream(115, 0);
    let a = orthogonal_matrix(4, 4, 1.0, &mut rng);
    let b = orthogonal_matrix(4, 4, 1.0, &mut rng);
    assert_ne!(a, b);
}

#[test]
fn sampling_is_reproducible_per_substream() {
    let mut init_rng = substream(116, 0);
    let gauss = GaussianMlpPolicy::new(2, 2, &[6], -0.3, &mut init_rng);
    let soft = SoftmaxPolicy::from_logits(1, 4, vec![0.1, 1.2, -0.4, 0.0]);
    let s = vec![0.2, -0.9];

    let mut r1 = substream(900, 7);
    let mut r2 = substream(900, 7);
    for _ in 0..20 {
        assert_eq!(gauss.sample_action(&s, &mut r1), gauss.sample_action(&s, &mut r2));
    }
    let mut r1 = substream(901, 7);
    let mut r2 = substream(901, 7);
    for _ in 0..20 {
        assert_eq!(soft.sample_action(&0, &mut r1), soft.sample_action(&0, &mut r2));
    }
}

#[test]
fn gaussian_sample_mean_matches_mean_head() {
    let mut rng = substream(117, 0);
    let pi = GaussianMlpPolicy::new(2, 2, &[6], -0.3, &mut rng);
    let s = vec![0.4, 0.1];
    let mean = pi.mean(&s);
    let std: Vec<f64> = pi.log_stds().iter().map(|l| l.exp()).collect();

    let n = 100_000;
    let mut sums = [0.0; 2];
    let mut draw_rng = substream(118, 1);
    for _ in 0..n {
        let a = pi.sample_action(&s, &mut draw_rng);
        sums[0] += a[0];
        sums[1] += a[1];
    }
    for k in 0..2 {
        let got = sums[k] / n as f64;
        let se = std[k] / (n as f64).sqrt();
        assert!(
            (got - mean[k]).abs() <= 3.0 * se,
            "dim {k}: sample mean {got} vs head {}, se {se}",
            mean[k]
        );
    }
}

#[test]
fn peaked_softmax_samples_its_mode() {
    let pi = SoftmaxPolicy::from_logits(1, 3, vec![12.0, 0.0, -3.0]);
    let mut rng = substream(119, 1);
    let mut hits = 0;
    let n = 10_000;
    for _ in 0..n {
        if pi.sample_action(&0, &mut rng) == 0 {
            hits += 1;
        }
    }
    assert!(
        hits as f64 / n as f64 >= 0.999,
        "mode frequency {}",
        hits as f64 / n as f64
    );
}

#[test]
fn softmax_round_trips_to_exact_tabular_policy() {
    let pi = SoftmaxPolicy::from_logits(2, 3, vec![0.5, -1.0, 2.0, 0.0, 0.0, 0.0]);
    let tab = pi.to_tabular();
    for s in 0..2 {
        let probs = pi.action_probs(s);
        for a in 0..3 {
            assert!((tab.prob(s, a) - probs[a]).abs() < 1e-12);
        }
    }
}
