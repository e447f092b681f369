//! Total-variation and quadrature checks against closed forms.

use mdp_core::{
    dataset_tv_divergence, gauss_legendre, random_policy, substream, tv_discrete,
    tv_gaussian_diag,
};
use rand::Rng;

/// Maclaurin series for erf, accurate to machine precision for |x| <= 3 with
/// enough terms. Used only as a test oracle.
fn erf(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        let n = n as f64;
        term *= -x * x / n;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if contrib.abs() < 1e-18 {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

#[test]
fn quadrature_integrates_polynomials_exactly() {
    // An n-point rule is exact through degree 2n - 1.
    let (nodes, weights) = gauss_legendre(8);
    for degree in 0..16 {
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(degree))
            .sum();
        let exact = if degree % 2 == 1 {
            0.0
        } else {
            2.0 / (degree as f64 + 1.0)
        };
        assert!(
            (integral - exact).abs() < 1e-13,
            "degree {degree}: {integral} vs {exact}"
        );
    }
}

#[test]
fn quadrature_weights_sum_to_interval_length() {
    for n in [2, 17, 64, 129] {
        let (nodes, weights) = gauss_legendre(n);
        assert_eq!(nodes.len(), n);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12, "n={n}: weight sum {total}");
        for pair in nodes.windows(2) {
            assert!(pair[0] < pair[1], "nodes must be sorted");
        }
    }
}

#[test]
fn gaussian_tv_matches_closed_form_in_one_dimension() {
    // For equal stds, TV(N(m1, s), N(m2, s)) = erf(|m1 - m2| / (2 sqrt(2) s)).
    // The fixed-grid rule integrates across the density-crossing kink, which
    // limits it to roughly 1e-3 absolute accuracy; it is a monitoring
    // diagnostic, so that is the documented contract.
    for (m1, m2, s) in [(0.0, 1.0, 1.0), (-0.3, 0.4, 0.5), (2.0, 2.0, 0.2)] {
        let tv = tv_gaussian_diag(&[m1], &[s], &[m2], &[s]);
        let expect = erf((m1 - m2).abs() / (2.0 * std::f64::consts::SQRT_2 * s));
        assert!(
            (tv - expect).abs() < 5e-3,
            "TV(N({m1},{s}), N({m2},{s})) = {tv}, want {expect}"
        );
    }
}

#[test]
fn gaussian_tv_reduces_to_marginal_when_other_dims_match() {
    // If only the first coordinate differs, the product-measure TV equals the
    // one-dimensional TV of that coordinate (same documented accuracy note as
    // above).
    let tv2 = tv_gaussian_diag(&[0.0, 0.7], &[1.0, 0.3], &[0.8, 0.7], &[1.0, 0.3]);
    let tv1 = tv_gaussian_diag(&[0.0], &[1.0], &[0.8], &[1.0]);
    assert!((tv2 - tv1).abs() < 5e-3, "2d {tv2} vs marginal {tv1}");
}

#[test]
fn gaussian_tv_is_zero_on_identical_and_symmetric() {
    assert!(tv_gaussian_diag(&[0.4, -1.0], &[0.5, 2.0], &[0.4, -1.0], &[0.5, 2.0]) < 1e-12);
    let ab = tv_gaussian_diag(&[0.0], &[1.0], &[1.0], &[2.0]);
    let ba = tv_gaussian_diag(&[1.0], &[2.0], &[0.0], &[1.0]);
    assert!((ab - ba).abs() < 1e-12);
    assert!(ab > 0.0 && ab < 1.0);
}

#[test]
fn discrete_tv_basics() {
    assert_eq!(tv_discrete(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    assert_eq!(tv_discrete(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    assert!((tv_discrete(&[0.7, 0.3], &[0.4, 0.6]) - 0.3).abs() < 1e-15);
}

#[test]
fn logged_action_divergence_matches_two_branch_integral() {
    // The defining computation splits the action space into the logged action
    // and its complement, weighting the point mass arbitrarily; the result
    // must not depend on that weight.
    let mut rng = substream(51, 0);
    for _ in 0..200 {
        let prob: f64 = rng.random();
        let weight: f64 = rng.random();
        let two_branch = 0.5 * (weight * (1.0 - prob) + (1.0 - weight) * (1.0 - prob));
        let got = dataset_tv_divergence(prob);
        assert!(
            (got - two_branch).abs() <= 1e-15,
            "prob {prob}, weight {weight}: {got} vs {two_branch}"
        );
    }
    assert_eq!(dataset_tv_divergence(1.0), 0.0);
    assert_eq!(dataset_tv_divergence(0.0), 0.5);
}

#[test]
fn policy_tv_helpers_agree_with_row_tv() {
    let mut rng = substream(52, 0);
    let a = random_policy(&mut rng, 4, 3, 0.1);
    let b = random_policy(&mut rng, 4, 3, 0.1);
    let mut max = 0.0f64;
    for s in 0..4 {
        let tv = a.tv(&b, s);
        assert!((tv - tv_discrete(a.row(s), b.row(s))).abs() < 1e-15);
        max = max.max(tv);
    }
    assert!((a.max_tv(&b) - max).abs() < 1e-15);
}
