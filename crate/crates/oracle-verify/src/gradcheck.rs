//! Central-difference validation of analytic gradients.
//!
//! Every trained objective in the workspace ships a hand-written gradient;
//! this is the gate that keeps those gradients honest. The probe perturbs one
//! random coordinate at a time so it works at any parameter count, and the
//! relative-error denominator is floored to keep near-zero coordinates from
//! manufacturing spurious blowups.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Step used for the symmetric difference quotient. Half the significand is
/// spent on the difference and half on the quotient, which is the standard
/// sweet spot for f64 central differences.
pub const PROBE_STEP: f64 = 1e-6;

/// Floor for the relative-error denominator.
pub const PROBE_DENOM_FLOOR: f64 = 1e-6;

/// Compares the analytic gradient of `loss` against central differences on
/// `n_probes` uniformly drawn coordinates of `params`, returning the worst
/// relative error seen.
///
/// `loss` must return the value and the full gradient at the queried point;
/// only the value is used at the shifted points. The caller is responsible
/// for probing at parameter settings where the loss is differentiable, which
/// for clipped objectives means staying clear of the clamp boundaries.
pub fn check_gradients<F>(
    mut loss: F,
    params: &[f64],
    n_probes: usize,
    rng: &mut ChaCha8Rng,
) -> f64
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    assert!(!params.is_empty(), "cannot probe an empty parameter vector");
    let (value, grad) = loss(params);
    assert!(
        value.is_finite(),
        "loss must be finite at the probe point, got {value}"
    );
    assert_eq!(
        grad.len(),
        params.len(),
        "gradient length must match the parameter count"
    );
    let mut theta = params.to_vec();
    let mut worst = 0.0f64;
    for _ in 0..n_probes {
        let i = rng.random_range(0..params.len());
        theta[i] = params[i] + PROBE_STEP;
        let (up, _) = loss(&theta);
        theta[i] = params[i] - PROBE_STEP;
        let (down, _) = loss(&theta);
        theta[i] = params[i];
        let numeric = (up - down) / (2.0 * PROBE_STEP);
        let denom = grad[i].abs().max(numeric.abs()).max(PROBE_DENOM_FLOOR);
        worst = worst.max((grad[i] - numeric).abs() / denom);
    }
    worst
}
