//! Total-variation distances between policies.
//!
//! Discrete rows are handled exactly. Diagonal Gaussians are integrated
//! numerically with a tensor-product Gauss-Legendre rule, one 129-node axis
//! per action dimension, spanning six pooled standard deviations around the
//! pooled means. The dataset-indexed divergence against a logged action is
//! the closed form half of one minus the probability the reference policy
//! assigns to that action.

const GL_NODES: usize = 129;
const SPAN_STDS: f64 = 6.0;

/// Exact total-variation distance between two finite distributions:
/// half the L1 distance.
pub fn tv_discrete(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share support size");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Total variation between a point-mass data distribution at a logged action
/// and a policy that assigns it probability `prob_logged`. Evaluating the
/// defining integral over both the logged point and its complement gives
/// half of (1 - prob_logged) regardless of how the point mass is weighted.
pub fn dataset_tv_divergence(prob_logged: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&prob_logged),
        "probability of the logged action must lie in [0, 1], got {prob_logged}"
    );
    0.5 * (1.0 - prob_logged)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Roots of the Legendre polynomial are found by Newton iteration from the
/// Chebyshev-like initial guess, with P_n and its derivative evaluated by the
/// three-term recurrence. Symmetric pairs are mirrored rather than solved
/// twice.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "quadrature order must be at least 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        // One polishing step after convergence keeps the nodes at machine
        // precision even when the loop exits on the tolerance.
        let (p, d) = legendre_with_derivative(n, x);
        x -= p / d;
        let dp = d;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Total-variation distance between two diagonal Gaussians over R^d, with
/// per-dimension means and standard deviations. Integrates half the absolute
/// density difference on a tensor grid; each axis gets 129 Gauss-Legendre
/// nodes over six pooled standard deviations around the pooled mean.
///
/// The integrand has a kink where the densities cross, which caps this rule's
/// accuracy near 1e-3 absolute. That is fine for its job: continuous TV is
/// only monitored, never optimized against or used in a certification.
pub fn tv_gaussian_diag(mean_a: &[f64], std_a: &[f64], mean_b: &[f64], std_b: &[f64]) -> f64 {
    let d = mean_a.len();
    assert!(
        d == std_a.len() && d == mean_b.len() && d == std_b.len(),
        "mean and std vectors must share one dimensionality"
    );
    assert!(d >= 1, "dimension must be at least 1");
    assert!(
        std_a.iter().chain(std_b).all(|s| s.is_finite() && *s > 0.0),
        "standard deviations must be positive and finite"
    );
    let (nodes, weights) = gauss_legendre(GL_NODES);

    // Per-axis integration windows centered on the pooled mean.
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for k in 0..d {
        let center = 0.5 * (mean_a[k] + mean_b[k]);
        let spread = mean_a[k].max(mean_b[k]) - mean_a[k].min(mean_b[k]);
        let pooled = std_a[k].max(std_b[k]) + 0.5 * spread;
        lo[k] = center - SPAN_STDS * pooled;
        hi[k] = center + SPAN_STDS * pooled;
    }

    // Walk the tensor grid with a mixed-radix counter to stay allocation-free
    // for any d.
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        let mut log_pa = 0.0;
        let mut log_pb = 0.0;
        for k in 0..d {
            let half = 0.5 * (hi[k] - lo[k]);
            let x = lo[k] + half * (nodes[idx[k]] + 1.0);
            w *= weights[idx[k]] * half;
            log_pa += log_normal_pdf(x, mean_a[k], std_a[k]);
            log_pb += log_normal_pdf(x, mean_b[k], std_b[k]);
        }
        total += w * 0.5 * (log_pa.exp() - log_pb.exp()).abs();

        let mut k = 0;
        loop {
            if k == d {
                return total;
            }
            idx[k] += 1;
            if idx[k] < GL_NODES {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn log_normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}
