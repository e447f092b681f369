//! Orthogonal weight initialization.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::mlp::MlpShape;

/// Draws a `rows x cols` matrix (row-major) whose smaller-side vectors are
/// orthonormal, scaled by `gain`. Tall matrices get orthonormal columns
/// (W^T W = gain^2 I), wide ones orthonormal rows. Built from the QR
/// factorization of a Gaussian draw with the Q columns sign-corrected by the
/// diagonal of R, which makes the distribution uniform over the orthogonal
/// group rather than biased by QR's sign convention.
pub fn orthogonal_matrix(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
    let transpose = rows < cols;
    let (tall_r, tall_c) = if transpose { (cols, rows) } else { (rows, cols) };

    let gauss = DMatrix::<f64>::from_fn(tall_r, tall_c, |_, _| StandardNormal.sample(rng));
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..tall_c {
        if r[(j, j)] < 0.0 {
            for i in 0..tall_r {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }

    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let v = if transpose { q[(j, i)] } else { q[(i, j)] };
            out[i * cols + j] = gain * v;
        }
    }
    out
}

/// Initializes a full parameter vector for `shape`: orthogonal weights with
/// `hidden_gain` on all layers except the last, `output_gain` on the last,
/// and zero biases.
pub fn init_mlp_params(
    shape: &MlpShape,
    hidden_gain: f64,
    output_gain: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut theta = vec![0.0; shape.n_params()];
    for l in 0..shape.n_layers() {
        let (w_off, _, fan_in, fan_out) = shape.layer_extent(l);
        let gain = if l + 1 == shape.n_layers() {
            output_gain
        } else {
            hidden_gain
        };
        let w = orthogonal_matrix(fan_out, fan_in, gain, rng);
        theta[w_off..w_off + fan_in * fan_out].copy_from_slice(&w);
    }
    theta
}
