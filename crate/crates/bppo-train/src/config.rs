use crate::error::TrainError;

/// Which objective the outer loop optimizes once a policy is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Keep the behavior policy's Q for every iteration. The surrogate's
    /// advantage never moves, only the snapshot policy does.
    Replacement,
    /// Refit Q toward the current snapshot's successor actions, running this
    /// many TD steps after each policy step, warm-started throughout.
    Iterative { refit_steps: usize },
    /// Improve the cloned policy once: no gate, no rebasing, the snapshot
    /// stays the cloned behavior policy for the whole run.
    Onestep,
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::Replacement => "replacement",
            Variant::Iterative { .. } => "iterative",
            Variant::Onestep => "onestep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Initial clip ratio; the surrogate band is 1 +- 2*eps.
    pub eps0: f64,
    /// Geometric decay applied to the clip ratio each step.
    pub sigma: f64,
    /// Step past which both the clip ratio and the learning rate freeze.
    pub decay_cutoff: usize,
    /// Asymmetric advantage coefficient.
    pub omega: f64,
    /// Policy gradient steps in the improvement loop.
    pub total_steps: usize,
    /// States drawn per loss batch.
    pub minibatch: usize,
    /// Actions sampled from the snapshot policy per drawn state.
    pub actions_per_state: usize,
    pub lr_base: f64,
    /// Geometric learning-rate decay, frozen at the same cutoff.
    pub lr_decay: f64,
    /// Learning rate for the iterative variant's Q refits.
    pub q_lr: f64,
    pub variant: Variant,
    /// Rollout episodes per J estimate on sampled worlds.
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eps0: 0.25,
            sigma: 0.96,
            decay_cutoff: 200,
            omega: 0.9,
            total_steps: 1000,
            minibatch: 256,
            actions_per_state: 1,
            lr_base: 1e-4,
            lr_decay: 0.96,
            q_lr: 1e-4,
            variant: Variant::Replacement,
            eval_episodes: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::Config(msg.into()));
        if !(self.eps0 > 0.0) {
            return fail("initial clip ratio must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return fail("clip decay must lie in (0, 1]");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return fail("learning-rate decay must lie in (0, 1]");
        }
        if !(self.lr_base > 0.0 && self.lr_base.is_finite()) {
            return fail("learning rate must be positive and finite");
        }
        if !(self.q_lr > 0.0 && self.q_lr.is_finite()) {
            return fail("Q refit learning rate must be positive and finite");
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return fail("asymmetric coefficient must lie strictly inside (0, 1)");
        }
        if self.actions_per_state == 0 {
            return fail("need at least one sampled action per state");
        }
        if self.minibatch * self.actions_per_state < 2 {
            return fail("loss batches need at least two samples to normalize");
        }
        if self.eval_episodes == 0 {
            return fail("policy evaluation needs at least one episode");
        }
        if let Variant::Iterative { refit_steps } = self.variant {
            if refit_steps == 0 {
                return fail("iterative variant needs at least one refit step");
            }
        }
        Ok(())
    }
}
