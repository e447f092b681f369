use mdp_core::{stream, substream};
use oracle_verify::{check_gradients, gradient_suite};
use rand::Rng;

#[test]
fn quadratic_gradient_matches_central_differences() {
    let mut rng = substream(701, stream::VERIFY);
    let params: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
    let worst = check_gradients(
        |theta| {
            let value = 0.5 * theta.iter().map(|t| t * t).sum::<f64>();
            (value, theta.to_vec())
        },
        &params,
        50,
        &mut rng,
    );
    assert!(worst <= 1e-7, "worst relative error {worst}");
}

#[test]
fn suite_covers_every_training_loss() {
    let reports = gradient_suite(77);
    assert_eq!(reports.len(), 6);
    let names: Vec<_> = reports.iter().map(|r| r.name).collect();
    for family in [
        "quadratic",
        "log-likelihood",
        "gaussian-log-likelihood",
        "q-td",
        "v-mse",
        "clipped-surrogate",
    ] {
        assert!(names.contains(&family), "missing {family}");
    }
    for r in &reports {
        assert!(
            r.pass,
            "{} failed: {} against tolerance {}",
            r.name, r.max_rel_error, r.tolerance
        );
    }
}

#[test]
fn zero_probes_report_zero_error() {
    let mut rng = substream(702, stream::VERIFY);
    let worst = check_gradients(|theta| (theta[0], vec![1.0]), &[3.0], 0, &mut rng);
    assert_eq!(worst, 0.0);
}

#[test]
fn wrong_gradient_is_loudly_wrong() {
    let mut rng = substream(703, stream::VERIFY);
    let params = [1.5];
    // Claim half the true slope of x^2; the probe must flag roughly 50% error.
    let worst = check_gradients(
        |theta| (theta[0] * theta[0], vec![theta[0]]),
        &params,
        10,
        &mut rng,
    );
    assert!(worst >= 0.4, "mismatch went unnoticed: {worst}");
}
