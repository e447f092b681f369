//! Adam with global-norm clipping and a capped geometric learning-rate decay.
//!
//! The update recipe is clip-then-Adam: the raw gradient's concatenated L2
//! norm is rescaled to at most `clip_norm`, then first and second moments are
//! updated and the bias-corrected step applied. The learning rate at loop
//! step i is `lr_base * lr_decay^min(i, decay_steps)`, mirroring the clip
//! ratio's own schedule: geometric decay that freezes after `decay_steps`.

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr_base: f64,
    /// Geometric decay factor applied once per step; 1.0 disables decay.
    pub lr_decay: f64,
    /// Step index after which the learning rate stops decaying.
    pub decay_steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Maximum global L2 norm of the gradient before the moment update.
    pub clip_norm: f64,
}

impl AdamConfig {
    /// Constant learning rate, default moments, norm clip at 0.5.
    pub fn constant(lr: f64) -> Self {
        Self {
            lr_base: lr,
            lr_decay: 1.0,
            decay_steps: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 0.5,
        }
    }

    /// Geometric decay `sigma` per step, frozen after `decay_steps`.
    pub fn decayed(lr: f64, sigma: f64, decay_steps: usize) -> Self {
        Self {
            lr_decay: sigma,
            decay_steps,
            ..Self::constant(lr)
        }
    }
}

/// The capped geometric schedule `base * decay^min(step, cap)`, computed by
/// repeated multiplication. Trace verification compares recorded schedules
/// bit for bit, and `powi` is not guaranteed to round identically across
/// call sites once the compiler folds constant exponents.
pub fn scheduled_value(base: f64, decay: f64, cap: usize, step: usize) -> f64 {
    let mut value = base;
    for _ in 0..step.min(cap) {
        value *= decay;
    }
    value
}

/// What one optimizer step did, for traces and for rejecting bad gradients.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// False when the gradient was non-finite and the step was skipped.
    pub applied: bool,
    /// Learning rate used (schedule value for the given step index).
    pub lr: f64,
    /// Global L2 norm of the incoming gradient.
    pub raw_norm: f64,
    /// Global L2 norm after clipping; equals `raw_norm` when under the clip.
    pub clipped_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    /// Count of applied updates, for bias correction.
    t: u32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, n_params: usize) -> Self {
        assert!(cfg.lr_base > 0.0, "learning rate must be positive");
        assert!(
            cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0,
            "decay factor must lie in (0, 1]"
        );
        assert!(cfg.clip_norm > 0.0, "clip norm must be positive");
        Self {
            cfg,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    /// The schedule value lr_base * lr_decay^min(step, decay_steps).
    pub fn lr_at(&self, step: usize) -> f64 {
        scheduled_value(self.cfg.lr_base, self.cfg.lr_decay, self.cfg.decay_steps, step)
    }

    /// Applies one update for loop step `step`. Non-finite gradients reject
    /// the step: parameters and moments are left untouched.
    pub fn step(&mut self, step: usize, theta: &mut [f64], grad: &[f64]) -> StepOutcome {
        assert_eq!(theta.len(), self.m.len(), "parameter count mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient count mismatch");
        let lr = self.lr_at(step);
        let raw_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !raw_norm.is_finite() {
            return StepOutcome {
                applied: false,
                lr,
                raw_norm,
                clipped_norm: raw_norm,
            };
        }
        let scale = if raw_norm > self.cfg.clip_norm {
            self.cfg.clip_norm / raw_norm
        } else {
            1.0
        };
        self.t += 1;
        let bc1 = 1.0 - self.cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.cfg.beta2.powi(self.t as i32);
        for k in 0..theta.len() {
            let g = grad[k] * scale;
            self.m[k] = self.cfg.beta1 * self.m[k] + (1.0 - self.cfg.beta1) * g;
            self.v[k] = self.cfg.beta2 * self.v[k] + (1.0 - self.cfg.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            theta[k] -= lr * m_hat / (v_hat.sqrt() + self.cfg.epsilon);
        }
        StepOutcome {
            applied: true,
            lr,
            raw_norm,
            clipped_norm: raw_norm * scale,
        }
    }
}
