use policy_models::scheduled_value;

/// Clip ratio at gradient step `i`: eps0 * sigma^i until the cutoff, frozen
/// afterwards. Shares its arithmetic with the optimizer's learning-rate
/// schedule so recorded traces can be recomputed bit for bit.
pub fn clip_ratio_schedule(eps0: f64, sigma: f64, cutoff: usize, i: usize) -> f64 {
    scheduled_value(eps0, sigma, cutoff, i)
}
