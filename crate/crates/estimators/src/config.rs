use policy_models::AdamConfig;

/// Knobs shared by the supervised fits. Defaults are the desk-scale
/// budgets; call sites override per fit.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub steps: usize,
    /// Minibatch size; ignored when `full_batch` is set.
    pub batch_size: usize,
    /// Use every sample each step instead of drawing minibatches. The
    /// gradient becomes deterministic, which the exactness tests rely on.
    pub full_batch: bool,
    pub adam: AdamConfig,
    /// Target-network trailing rate for TD fits.
    pub polyak_tau: f64,
    /// Cadence of full-dataset diagnostics during behavior cloning.
    pub eval_every: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            batch_size: 256,
            full_batch: false,
            adam: AdamConfig::constant(1e-3),
            polyak_tau: 0.005,
            eval_every: 100,
        }
    }
}
