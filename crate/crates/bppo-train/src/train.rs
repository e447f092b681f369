use estimators::{bootstrap_pairs, policy_td_step, AdvantageEstimator, FitConfig, TdFitter};
use mdp_core::{stream, substream};
use offline_data::{FieldCodec, OfflineDataset};
use policy_models::{
    ActionValueModel, Adam, AdamConfig, StateValueModel, StochasticPolicy,
};

use crate::config::{TrainConfig, Variant};
use crate::error::TrainError;
use crate::eval::{JEstimate, World};
use crate::loss::bppo_loss;
use crate::ratio::{ratio_samples, summarize_ratios};
use crate::sample::sample_loss_batch;
use crate::schedule::clip_ratio_schedule;

/// One row of the training trace, written verbatim to metrics files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub eps: f64,
    pub lr: f64,
    pub loss: f64,
    pub j_mean: f64,
    pub j_std_error: f64,
    pub accepted: bool,
    pub ratio_mean_abs_deviation: f64,
    pub ratio_in_band_fraction: f64,
    pub grad_raw_norm: f64,
    pub grad_clipped_norm: f64,
}

/// Everything a run produces: the per-step records, the accepted-policy
/// chain (entry 0 is the cloned behavior policy), and the policy the run
/// hands back.
#[derive(Debug, Clone)]
pub struct ImprovementTrace<P> {
    pub records: Vec<StepRecord>,
    pub checkpoints: Vec<P>,
    pub accepted_js: Vec<f64>,
    pub final_policy: P,
    pub final_j: f64,
    pub dropped_samples: usize,
}

impl<P> ImprovementTrace<P> {
    /// Number of accepted improvements past the starting policy.
    pub fn accepted_count(&self) -> usize {
        self.checkpoints.len() - 1
    }
}

/// The accept-if-improved policy improvement loop.
///
/// Starts from the cloned behavior policy and takes `total_steps` surrogate
/// gradient steps. After each step the candidate is scored on the world; a
/// strictly better score promotes it to the new snapshot. The replacement
/// variant keeps the behavior Q for the whole run, the iterative variant
/// refits Q toward the snapshot's successor actions as it goes, and the
/// Onestep variant never gates or rebases at all and returns the raw learner.
pub fn train_bppo<W, Q, V>(
    dataset: &OfflineDataset<<W::Policy as StochasticPolicy>::State, <W::Policy as StochasticPolicy>::Action>,
    world: &W,
    behavior: W::Policy,
    mut estimator: AdvantageEstimator<Q, V>,
    cfg: &TrainConfig,
) -> Result<ImprovementTrace<W::Policy>, TrainError>
where
    W: World,
    <W::Policy as StochasticPolicy>::State: FieldCodec,
    <W::Policy as StochasticPolicy>::Action: FieldCodec,
    Q: ActionValueModel<
            State = <W::Policy as StochasticPolicy>::State,
            Action = <W::Policy as StochasticPolicy>::Action,
        > + Clone,
    V: StateValueModel<State = <W::Policy as StochasticPolicy>::State>,
{
    cfg.validate()?;
    let gamma = dataset.meta().gamma;
    let mut train_rng = substream(cfg.seed, stream::TRAIN);
    let mut ratio_rng = substream(cfg.seed, stream::RATIO);
    // Every gate evaluation replays the same episode stream, so candidates
    // are compared on common random numbers rather than fresh noise.
    let eval = |policy: &W::Policy| -> Result<JEstimate, mdp_core::MdpError> {
        world.evaluate(policy, cfg.eval_episodes, &mut substream(cfg.seed, stream::EVAL))
    };

    let mut learner = behavior.clone();
    let mut snapshot = behavior.clone();
    let j0 = eval(&behavior)?;
    let mut best = j0;
    let mut last = j0;
    let mut checkpoints = vec![behavior.clone()];
    let mut accepted_js = vec![j0.mean];

    let mut adam = Adam::new(
        AdamConfig::decayed(cfg.lr_base, cfg.lr_decay, cfg.decay_cutoff),
        learner.n_params(),
    );

    let refit_pairs = matches!(cfg.variant, Variant::Iterative { .. }).then(|| bootstrap_pairs(dataset));
    let mut refitter = match cfg.variant {
        Variant::Iterative { .. } => {
            let fit_cfg = FitConfig {
                batch_size: cfg.minibatch,
                adam: AdamConfig::constant(cfg.q_lr),
                ..FitConfig::default()
            };
            Some(TdFitter::new(estimator.q.clone(), &fit_cfg))
        }
        _ => None,
    };

    let mut records: Vec<StepRecord> = Vec::with_capacity(cfg.total_steps);
    let mut dropped_samples = 0usize;

    for i in 0..cfg.total_steps {
        let eps = clip_ratio_schedule(cfg.eps0, cfg.sigma, cfg.decay_cutoff, i);
        let batch = sample_loss_batch(dataset, &snapshot, &estimator, cfg, &mut train_rng)?;
        let out = bppo_loss(
            &learner,
            &snapshot,
            &batch.states,
            &batch.actions,
            &batch.advantages,
            eps,
        );
        dropped_samples += out.dropped;
        if out.dropped as f64 > 0.01 * batch.len() as f64 {
            return Err(TrainError::Aborted {
                step: i,
                reason: format!(
                    "{} of {} importance ratios were non-finite",
                    out.dropped,
                    batch.len()
                ),
                records,
            });
        }
        if !out.loss.is_finite() {
            return Err(TrainError::Aborted {
                step: i,
                reason: "surrogate loss became non-finite".into(),
                records,
            });
        }
        let outcome = adam.step(i, learner.params_mut(), &out.grad);
        learner.project_params();

        if let (Some(pairs), Some(fitter), Variant::Iterative { refit_steps }) =
            (&refit_pairs, refitter.as_mut(), cfg.variant)
        {
            for _ in 0..refit_steps {
                let idx = dataset.sample_indices(cfg.minibatch.min(pairs.len()), &mut train_rng)?;
                policy_td_step(fitter, pairs, &idx, &snapshot, gamma, &mut train_rng);
            }
            estimator.q.params_mut().copy_from_slice(fitter.online().params());
        }

        let j = eval(&learner)?;
        last = j;
        let accepted = cfg.variant != Variant::Onestep && j.mean > best.mean;
        if accepted {
            best = j;
            snapshot = learner.clone();
            checkpoints.push(learner.clone());
            accepted_js.push(j.mean);
        }

        let ratios = ratio_samples(&learner, &behavior, &batch.states, &mut ratio_rng);
        let summary = summarize_ratios(&ratios, eps);
        records.push(StepRecord {
            step: i,
            eps,
            lr: outcome.lr,
            loss: out.loss,
            j_mean: j.mean,
            j_std_error: j.std_error,
            accepted,
            ratio_mean_abs_deviation: summary.mean_abs_deviation,
            ratio_in_band_fraction: summary.in_band_fraction,
            grad_raw_norm: outcome.raw_norm,
            grad_clipped_norm: outcome.clipped_norm,
        });
    }

    let (final_policy, final_j) = if cfg.variant == Variant::Onestep {
        (learner, last.mean)
    } else {
        (
            checkpoints.last().expect("chain starts nonempty").clone(),
            *accepted_js.last().expect("chain starts nonempty"),
        )
    };
    Ok(ImprovementTrace {
        records,
        checkpoints,
        accepted_js,
        final_policy,
        final_j,
        dropped_samples,
    })
}
