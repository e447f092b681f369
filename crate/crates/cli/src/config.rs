//! Flat key=value experiment configuration.
//!
//! One file describes a whole experiment: the world, the dataset, every fit
//! budget, and the improvement-loop hyperparameters. Lines hold `key = value`
//! pairs; `#` starts a comment; unknown keys are rejected rather than
//! ignored, so a typo cannot silently run the defaults. When the same key
//! appears twice the later line wins, which lets a file end with local
//! overrides.

use std::path::Path;

use bppo_train::{TrainConfig, Variant};

use crate::error::CliError;

/// Everything a run needs beyond its seed. Defaults follow the published
/// hyperparameter table where it speaks (clip ratio 0.25, decay 0.96 frozen
/// after step 200, asymmetry 0.9, learning rate 1e-4, batch 256, ten
/// evaluation episodes); fit budgets and world shapes are desk-scale
/// choices documented in docs/formats.md.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub world: String,
    /// Task instance key: picks the goal, slip, or arm payoffs.
    pub world_seed: u64,
    pub gamma: f64,
    pub horizon: usize,
    /// Episodes logged by gen-dataset.
    pub episodes: usize,
    /// Uniform mixing for tabular logging policies.
    pub behavior_eps: f64,
    /// Exploration noise of the point-reach logging controller.
    pub behavior_noise: f64,
    pub dataset: String,
    pub out: String,
    pub seeds: Vec<u64>,

    pub bc_steps: usize,
    pub bc_batch: usize,
    pub bc_lr: f64,

    pub q_steps: usize,
    pub q_batch: usize,
    pub q_fit_lr: f64,
    pub polyak_tau: f64,

    pub v_steps: usize,
    pub v_batch: usize,
    pub v_lr: f64,

    /// Hidden widths of the continuous-world networks.
    pub hidden: Vec<usize>,
    pub init_log_std: f64,

    pub variant: String,
    pub refit_steps: usize,
    pub total_steps: usize,
    pub minibatch: usize,
    pub actions_per_state: usize,
    pub eps0: f64,
    pub sigma: f64,
    pub decay_cutoff: usize,
    pub omega: f64,
    pub lr: f64,
    pub lr_decay: f64,
    pub q_refit_lr: f64,
    pub eval_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: "tabular-grid".to_string(),
            world_seed: 0,
            gamma: 0.9,
            horizon: 60,
            episodes: 100,
            behavior_eps: 0.4,
            behavior_noise: 0.4,
            dataset: String::new(),
            out: String::new(),
            seeds: vec![1],

            bc_steps: 2000,
            bc_batch: 256,
            bc_lr: 0.05,

            q_steps: 3000,
            q_batch: 256,
            q_fit_lr: 0.05,
            polyak_tau: 0.01,

            v_steps: 2000,
            v_batch: 256,
            v_lr: 0.05,

            hidden: vec![16, 16],
            init_log_std: -1.0,

            variant: "replacement".to_string(),
            refit_steps: 5,
            total_steps: 1000,
            minibatch: 256,
            actions_per_state: 1,
            eps0: 0.25,
            sigma: 0.96,
            decay_cutoff: 200,
            omega: 0.9,
            lr: 1e-4,
            lr_decay: 0.96,
            q_refit_lr: 1e-4,
            eval_episodes: 10,
        }
    }
}

fn bad(key: &str, value: &str, wanted: &str) -> CliError {
    CliError::Usage(format!(
        "config key `{key}`: cannot parse `{value}` as {wanted}"
    ))
}

fn f64_value(key: &str, value: &str) -> Result<f64, CliError> {
    value.parse().map_err(|_| bad(key, value, "a number"))
}

fn usize_value(key: &str, value: &str) -> Result<usize, CliError> {
    value.parse().map_err(|_| bad(key, value, "a count"))
}

fn u64_value(key: &str, value: &str) -> Result<u64, CliError> {
    value.parse().map_err(|_| bad(key, value, "an integer"))
}

fn list_value<T: std::str::FromStr>(key: &str, value: &str, wanted: &str) -> Result<Vec<T>, CliError> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| item.trim().parse().map_err(|_| bad(key, value, wanted)))
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` pair. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "world" => self.world = value.to_string(),
            "world_seed" => self.world_seed = u64_value(key, value)?,
            "gamma" => self.gamma = f64_value(key, value)?,
            "horizon" => self.horizon = usize_value(key, value)?,
            "episodes" => self.episodes = usize_value(key, value)?,
            "behavior_eps" => self.behavior_eps = f64_value(key, value)?,
            "behavior_noise" => self.behavior_noise = f64_value(key, value)?,
            "dataset" => self.dataset = value.to_string(),
            "out" => self.out = value.to_string(),
            "seeds" => self.seeds = list_value(key, value, "a seed list")?,
            "bc_steps" => self.bc_steps = usize_value(key, value)?,
            "bc_batch" => self.bc_batch = usize_value(key, value)?,
            "bc_lr" => self.bc_lr = f64_value(key, value)?,
            "q_steps" => self.q_steps = usize_value(key, value)?,
            "q_batch" => self.q_batch = usize_value(key, value)?,
            "q_fit_lr" => self.q_fit_lr = f64_value(key, value)?,
            "polyak_tau" => self.polyak_tau = f64_value(key, value)?,
            "v_steps" => self.v_steps = usize_value(key, value)?,
            "v_batch" => self.v_batch = usize_value(key, value)?,
            "v_lr" => self.v_lr = f64_value(key, value)?,
            "hidden" => self.hidden = list_value(key, value, "a width list")?,
            "init_log_std" => self.init_log_std = f64_value(key, value)?,
            "variant" => self.variant = value.to_string(),
            "refit_steps" => self.refit_steps = usize_value(key, value)?,
            "total_steps" => self.total_steps = usize_value(key, value)?,
            "minibatch" => self.minibatch = usize_value(key, value)?,
            "actions_per_state" => self.actions_per_state = usize_value(key, value)?,
            "eps0" => self.eps0 = f64_value(key, value)?,
            "sigma" => self.sigma = f64_value(key, value)?,
            "decay_cutoff" => self.decay_cutoff = usize_value(key, value)?,
            "omega" => self.omega = f64_value(key, value)?,
            "lr" => self.lr = f64_value(key, value)?,
            "lr_decay" => self.lr_decay = f64_value(key, value)?,
            "q_refit_lr" => self.q_refit_lr = f64_value(key, value)?,
            "eval_episodes" => self.eval_episodes = usize_value(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected `key = value`, got `{line}`",
                    i + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Canonical echo: every key in a fixed order, parseable back into an
    /// equal config.
    pub fn to_text(&self) -> String {
        let join_u64 = |xs: &[u64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let join_usize = |xs: &[usize]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "world = {}\nworld_seed = {}\ngamma = {}\nhorizon = {}\nepisodes = {}\n\
             behavior_eps = {}\nbehavior_noise = {}\ndataset = {}\nout = {}\nseeds = {}\n\
             bc_steps = {}\nbc_batch = {}\nbc_lr = {}\n\
             q_steps = {}\nq_batch = {}\nq_fit_lr = {}\npolyak_tau = {}\n\
             v_steps = {}\nv_batch = {}\nv_lr = {}\n\
             hidden = {}\ninit_log_std = {}\n\
             variant = {}\nrefit_steps = {}\ntotal_steps = {}\nminibatch = {}\n\
             actions_per_state = {}\neps0 = {}\nsigma = {}\ndecay_cutoff = {}\nomega = {}\n\
             lr = {}\nlr_decay = {}\nq_refit_lr = {}\neval_episodes = {}\n",
            self.world,
            self.world_seed,
            self.gamma,
            self.horizon,
            self.episodes,
            self.behavior_eps,
            self.behavior_noise,
            self.dataset,
            self.out,
            join_u64(&self.seeds),
            self.bc_steps,
            self.bc_batch,
            self.bc_lr,
            self.q_steps,
            self.q_batch,
            self.q_fit_lr,
            self.polyak_tau,
            self.v_steps,
            self.v_batch,
            self.v_lr,
            join_usize(&self.hidden),
            self.init_log_std,
            self.variant,
            self.refit_steps,
            self.total_steps,
            self.minibatch,
            self.actions_per_state,
            self.eps0,
            self.sigma,
            self.decay_cutoff,
            self.omega,
            self.lr,
            self.lr_decay,
            self.q_refit_lr,
            self.eval_episodes,
        )
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig, CliError> {
        let variant = match self.variant.as_str() {
            "replacement" => Variant::Replacement,
            "onestep" => Variant::Onestep,
            "iterative" => Variant::Iterative {
                refit_steps: self.refit_steps,
            },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown variant `{other}`; expected replacement, onestep, or iterative"
                )))
            }
        };
        Ok(TrainConfig {
            eps0: self.eps0,
            sigma: self.sigma,
            decay_cutoff: self.decay_cutoff,
            omega: self.omega,
            total_steps: self.total_steps,
            minibatch: self.minibatch,
            actions_per_state: self.actions_per_state,
            lr_base: self.lr,
            lr_decay: self.lr_decay,
            q_lr: self.q_refit_lr,
            variant,
            eval_episodes: self.eval_episodes,
            seed,
        })
    }
}
