//! The full training pipeline behind `bppo train`.
//!
//! One run is one seed on one world: clone the logging policy, fit its Q by
//! SARSA and its V by return regression, then walk the gated improvement
//! loop. Every stage leaves diagnostics in the run's metrics table, and the
//! cloned and final policies land as checkpoints next to it. Reruns of the
//! same config and seed write byte-identical files.

use std::path::{Path, PathBuf};

use bppo_train::{
    clip_ratio_schedule, evaluate_policy, ratio_samples, train_bppo, ContinuousWorld,
    ImprovementTrace, StepRecord, TabularWorld, TrainError,
};
use estimators::{behavior_cloning, fit_q_sarsa, fit_value, AdvantageEstimator, FitConfig};
use mdp_core::{stream, substream};
use offline_data::{
    load_dataset, monte_carlo_returns, ContinuousDataset, FieldCodec, OfflineDataset,
    TabularDataset,
};
use policy_models::{
    AdamConfig, GaussianMlpPolicy, MlpQ, MlpV, SoftmaxPolicy, StochasticPolicy, TableQ, TableV,
};

use crate::ckpt;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::metrics::MetricsTable;
use crate::worlds::{tabular_setup, point_reach_env, WorldKind};

/// The decayed schedule every run is compared against when reporting band
/// containment, so runs with different decay settings stay comparable.
pub const REFERENCE_SIGMA: f64 = 0.96;
/// Relative slack on the clip band edges when counting contained ratios.
pub const BAND_SLACK: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_id: String,
    pub run_dir: PathBuf,
    pub behavior_j: f64,
    pub final_j: f64,
    pub accepted: usize,
    pub steps: usize,
    pub records: Vec<StepRecord>,
}

pub fn run_id_for(cfg: &RunConfig, seed: u64) -> String {
    format!("{}-{}-s{}", cfg.world, cfg.variant, seed)
}

const FIT_EVAL_EVERY: usize = 100;

fn fit_cfg(steps: usize, batch: usize, lr: f64, tau: f64) -> FitConfig {
    FitConfig {
        steps,
        batch_size: batch,
        full_batch: false,
        adam: AdamConfig::constant(lr),
        polyak_tau: tau,
        eval_every: FIT_EVAL_EVERY,
    }
}

/// Fraction of finite ratios inside the clip band for `eps`, with relative
/// slack on both edges.
pub fn banded_fraction(ratios: &[f64], eps: f64, slack: f64) -> f64 {
    let lo = (1.0 - 2.0 * eps) * (1.0 - slack);
    let hi = (1.0 + 2.0 * eps) * (1.0 + slack);
    let mut kept = 0usize;
    let mut inside = 0usize;
    for &r in ratios {
        if r.is_finite() {
            kept += 1;
            if r >= lo && r <= hi {
                inside += 1;
            }
        }
    }
    inside as f64 / kept.max(1) as f64
}

fn push_step_rows(metrics: &mut MetricsTable, r: &StepRecord) {
    metrics.push(r.step, "eps", r.eps);
    metrics.push(r.step, "lr", r.lr);
    metrics.push(r.step, "loss", r.loss);
    metrics.push(r.step, "j_mean", r.j_mean);
    metrics.push(r.step, "j_std_error", r.j_std_error);
    metrics.push(r.step, "accepted", if r.accepted { 1.0 } else { 0.0 });
    metrics.push(r.step, "ratio_mean_abs_deviation", r.ratio_mean_abs_deviation);
    metrics.push(r.step, "ratio_in_band_fraction", r.ratio_in_band_fraction);
    metrics.push(r.step, "grad_raw_norm", r.grad_raw_norm);
    metrics.push(r.step, "grad_clipped_norm", r.grad_clipped_norm);
}

/// Trace rows plus run summary, including band containment of the final
/// policy's ratios against both the run's own frozen clip and the shared
/// reference schedule.
fn record_trace<P>(
    metrics: &mut MetricsTable,
    trace: &ImprovementTrace<P>,
    clone: &P,
    states: &[P::State],
    cfg: &RunConfig,
    seed: u64,
) where
    P: StochasticPolicy,
{
    for r in &trace.records {
        push_step_rows(metrics, r);
    }
    let end = cfg.total_steps;
    metrics.push(end, "behavior_j", trace.accepted_js[0]);
    metrics.push(end, "final_j", trace.final_j);
    metrics.push(end, "accepted_count", trace.accepted_count() as f64);
    metrics.push(end, "dropped_samples", trace.dropped_samples as f64);

    let ratios = ratio_samples(
        &trace.final_policy,
        clone,
        states,
        &mut substream(seed, stream::RATIO),
    );
    let eps_frozen = clip_ratio_schedule(cfg.eps0, cfg.sigma, cfg.decay_cutoff, cfg.decay_cutoff);
    let eps_reference =
        clip_ratio_schedule(cfg.eps0, REFERENCE_SIGMA, cfg.decay_cutoff, cfg.decay_cutoff);
    metrics.push(
        end,
        "final_in_band_frozen",
        banded_fraction(&ratios, eps_frozen, BAND_SLACK),
    );
    metrics.push(
        end,
        "final_in_band_reference",
        banded_fraction(&ratios, eps_reference, BAND_SLACK),
    );
}

fn check_dataset_meta<S: FieldCodec, A: FieldCodec>(
    ds: &OfflineDataset<S, A>,
    kind: WorldKind,
    cfg: &RunConfig,
    path: &Path,
) -> Result<(), CliError> {
    let meta = ds.meta();
    if meta.env != kind.name() {
        return Err(CliError::Data(format!(
            "dataset {} was logged on `{}`, config names `{}`",
            path.display(),
            meta.env,
            kind.name()
        )));
    }
    if meta.gamma != cfg.gamma {
        return Err(CliError::Data(format!(
            "dataset {} was labeled with gamma {}, config says {}",
            path.display(),
            meta.gamma,
            cfg.gamma
        )));
    }
    Ok(())
}

fn load_run_dataset<S: FieldCodec, A: FieldCodec>(
    cfg: &RunConfig,
    kind: WorldKind,
) -> Result<(OfflineDataset<S, A>, PathBuf), CliError> {
    if cfg.dataset.is_empty() {
        return Err(CliError::Usage(
            "no dataset configured; run gen-dataset first and set `dataset`".to_string(),
        ));
    }
    let path = PathBuf::from(&cfg.dataset);
    let ds = load_dataset(&path)
        .map_err(|e| CliError::Data(format!("dataset {}: {e}", path.display())))?;
    check_dataset_meta(&ds, kind, cfg, &path)?;
    Ok((ds, path))
}

struct RunDirs {
    run_dir: PathBuf,
    metrics_path: PathBuf,
    behavior_ckpt: PathBuf,
    final_ckpt: PathBuf,
}

fn prepare_dirs(out_root: &Path, run_id: &str) -> Result<RunDirs, CliError> {
    let run_dir = out_root.join(run_id);
    let ckpt_dir = run_dir.join("checkpoints");
    std::fs::create_dir_all(&ckpt_dir)
        .map_err(|e| CliError::Data(format!("run dir {}: {e}", ckpt_dir.display())))?;
    Ok(RunDirs {
        metrics_path: run_dir.join("metrics.csv"),
        behavior_ckpt: ckpt_dir.join("behavior.ckpt"),
        final_ckpt: ckpt_dir.join("final.ckpt"),
        run_dir,
    })
}

fn write_resolved(cfg: &RunConfig, seed: u64, run_dir: &Path) -> Result<(), CliError> {
    let mut resolved = cfg.clone();
    resolved.seeds = vec![seed];
    let path = run_dir.join("resolved.cfg");
    std::fs::write(&path, resolved.to_text())
        .map_err(|e| CliError::Data(format!("resolved config {}: {e}", path.display())))
}

/// Runs the abort-aware improvement loop: on a numerical abort the partial
/// trace still reaches the metrics file before the error surfaces.
fn gated_loop<W, Q, V>(
    ds: &OfflineDataset<<W::Policy as StochasticPolicy>::State, <W::Policy as StochasticPolicy>::Action>,
    world: &W,
    clone: W::Policy,
    estimator: AdvantageEstimator<Q, V>,
    cfg: &RunConfig,
    seed: u64,
    run_id: &str,
    metrics: &mut MetricsTable,
    metrics_path: &Path,
) -> Result<ImprovementTrace<W::Policy>, CliError>
where
    W: bppo_train::World,
    <W::Policy as StochasticPolicy>::State: FieldCodec,
    <W::Policy as StochasticPolicy>::Action: FieldCodec,
    Q: policy_models::ActionValueModel<
            State = <W::Policy as StochasticPolicy>::State,
            Action = <W::Policy as StochasticPolicy>::Action,
        > + Clone,
    V: policy_models::StateValueModel<State = <W::Policy as StochasticPolicy>::State>,
{
    let train_cfg = cfg.train_config(seed)?;
    match train_bppo(ds, world, clone, estimator, &train_cfg) {
        Ok(trace) => Ok(trace),
        Err(TrainError::Aborted {
            step,
            reason,
            records,
        }) => {
            for r in &records {
                push_step_rows(metrics, r);
            }
            metrics.write(metrics_path)?;
            Err(CliError::Numerical(format!(
                "run {run_id} aborted at step {step}: {reason}"
            )))
        }
        Err(other) => Err(other.into()),
    }
}

fn train_tabular(
    cfg: &RunConfig,
    kind: WorldKind,
    seed: u64,
    out_root: &Path,
    run_id: &str,
) -> Result<RunOutcome, CliError> {
    let (ds, _): (TabularDataset, _) = load_run_dataset(cfg, kind)?;
    let setup = tabular_setup(kind, cfg)?;
    let dirs = prepare_dirs(out_root, run_id)?;
    let mut metrics = MetricsTable::new(run_id, seed);

    let n_states = setup.mdp.n_states();
    let n_actions = setup.mdp.n_actions();
    let fitted = behavior_cloning(
        &ds,
        SoftmaxPolicy::new_uniform(n_states, n_actions),
        &fit_cfg(cfg.bc_steps, cfg.bc_batch, cfg.bc_lr, cfg.polyak_tau),
        &mut substream(seed, stream::BC),
    )?;
    for (k, ll) in fitted.ll_curve.iter().enumerate() {
        metrics.push(k * FIT_EVAL_EVERY, "bc_log_likelihood", *ll);
    }
    metrics.push(cfg.bc_steps, "bc_final_log_likelihood", fitted.final_log_likelihood);

    let q = fit_q_sarsa(
        &ds,
        TableQ::zeros(n_states, n_actions),
        &fit_cfg(cfg.q_steps, cfg.q_batch, cfg.q_fit_lr, cfg.polyak_tau),
        &mut substream(seed, stream::Q_FIT),
    )?;
    metrics.push(cfg.q_steps, "q_final_td_loss", q.final_td_loss);

    let labels = monte_carlo_returns(&ds, cfg.gamma);
    let v = fit_value(
        &ds,
        &labels,
        TableV::zeros(n_states),
        &fit_cfg(cfg.v_steps, cfg.v_batch, cfg.v_lr, cfg.polyak_tau),
        &mut substream(seed, stream::V_FIT),
    )?;
    metrics.push(cfg.v_steps, "v_final_mse", v.final_mse);

    let clone = fitted.policy;
    ckpt::save_softmax(&dirs.behavior_ckpt, &clone)?;

    let world = TabularWorld::new(setup.mdp);
    let estimator = AdvantageEstimator::new(q.model, v.model, cfg.omega);
    let trace = gated_loop(
        &ds,
        &world,
        clone.clone(),
        estimator,
        cfg,
        seed,
        run_id,
        &mut metrics,
        &dirs.metrics_path,
    )?;

    let states: Vec<usize> = ds.transitions().iter().map(|t| t.state).collect();
    record_trace(&mut metrics, &trace, &clone, &states, cfg, seed);
    ckpt::save_softmax(&dirs.final_ckpt, &trace.final_policy)?;
    metrics.write(&dirs.metrics_path)?;
    write_resolved(cfg, seed, &dirs.run_dir)?;

    Ok(RunOutcome {
        run_id: run_id.to_string(),
        run_dir: dirs.run_dir,
        behavior_j: trace.accepted_js[0],
        final_j: trace.final_j,
        accepted: trace.accepted_count(),
        steps: cfg.total_steps,
        records: trace.records,
    })
}

fn train_continuous(
    cfg: &RunConfig,
    seed: u64,
    out_root: &Path,
    run_id: &str,
) -> Result<RunOutcome, CliError> {
    let (ds, _): (ContinuousDataset, _) = load_run_dataset(cfg, WorldKind::PointReach)?;
    let env = point_reach_env(cfg)?;
    let dirs = prepare_dirs(out_root, run_id)?;
    let mut metrics = MetricsTable::new(run_id, seed);

    let state_dim = 2;
    let action_dim = 2;
    let init = GaussianMlpPolicy::new(
        state_dim,
        action_dim,
        &cfg.hidden,
        cfg.init_log_std,
        &mut substream(seed, stream::POLICY_INIT),
    );
    let fitted = behavior_cloning(
        &ds,
        init,
        &fit_cfg(cfg.bc_steps, cfg.bc_batch, cfg.bc_lr, cfg.polyak_tau),
        &mut substream(seed, stream::BC),
    )?;
    for (k, ll) in fitted.ll_curve.iter().enumerate() {
        metrics.push(k * FIT_EVAL_EVERY, "bc_log_likelihood", *ll);
    }
    metrics.push(cfg.bc_steps, "bc_final_log_likelihood", fitted.final_log_likelihood);

    let q = fit_q_sarsa(
        &ds,
        MlpQ::new(state_dim, action_dim, &cfg.hidden, &mut substream(seed, stream::Q_FIT)),
        &fit_cfg(cfg.q_steps, cfg.q_batch, cfg.q_fit_lr, cfg.polyak_tau),
        &mut substream(seed, stream::Q_FIT),
    )?;
    metrics.push(cfg.q_steps, "q_final_td_loss", q.final_td_loss);

    let labels = monte_carlo_returns(&ds, cfg.gamma);
    let v = fit_value(
        &ds,
        &labels,
        MlpV::new(state_dim, &cfg.hidden, &mut substream(seed, stream::V_FIT)),
        &fit_cfg(cfg.v_steps, cfg.v_batch, cfg.v_lr, cfg.polyak_tau),
        &mut substream(seed, stream::V_FIT),
    )?;
    metrics.push(cfg.v_steps, "v_final_mse", v.final_mse);

    let clone = fitted.policy;
    ckpt::save_gaussian(&dirs.behavior_ckpt, &clone)?;

    let world = ContinuousWorld::new(env, cfg.gamma);
    let estimator = AdvantageEstimator::new(q.model, v.model, cfg.omega);
    let trace = gated_loop(
        &ds,
        &world,
        clone.clone(),
        estimator,
        cfg,
        seed,
        run_id,
        &mut metrics,
        &dirs.metrics_path,
    )?;

    let states: Vec<Vec<f64>> = ds.transitions().iter().map(|t| t.state.clone()).collect();
    record_trace(&mut metrics, &trace, &clone, &states, cfg, seed);
    ckpt::save_gaussian(&dirs.final_ckpt, &trace.final_policy)?;
    metrics.write(&dirs.metrics_path)?;
    write_resolved(cfg, seed, &dirs.run_dir)?;

    Ok(RunOutcome {
        run_id: run_id.to_string(),
        run_dir: dirs.run_dir,
        behavior_j: trace.accepted_js[0],
        final_j: trace.final_j,
        accepted: trace.accepted_count(),
        steps: cfg.total_steps,
        records: trace.records,
    })
}

/// One seed's full pipeline on whatever world the config names.
pub fn train_run(cfg: &RunConfig, seed: u64, out_root: &Path) -> Result<RunOutcome, CliError> {
    let run_id = run_id_for(cfg, seed);
    train_run_named(cfg, seed, out_root, &run_id)
}

/// Same pipeline under a caller-chosen run id, used by the ablation sweep
/// to keep grid points in separate directories.
pub fn train_run_named(
    cfg: &RunConfig,
    seed: u64,
    out_root: &Path,
    run_id: &str,
) -> Result<RunOutcome, CliError> {
    let kind = WorldKind::parse(&cfg.world)?;
    // Validate the improvement-loop config before any slow fitting starts.
    cfg.train_config(seed)?.validate().map_err(CliError::from)?;
    if kind.is_tabular() {
        train_tabular(cfg, kind, seed, out_root, run_id)
    } else {
        train_continuous(cfg, seed, out_root, run_id)
    }
}

/// Exact or sampled return of a saved policy, matching the gate estimator.
pub fn evaluate_checkpoint(
    cfg: &RunConfig,
    policy: &ckpt::LoadedPolicy,
    episodes: usize,
    seed: u64,
) -> Result<bppo_train::JEstimate, CliError> {
    let kind = WorldKind::parse(&cfg.world)?;
    match policy {
        ckpt::LoadedPolicy::Tabular(p) => {
            if !kind.is_tabular() {
                return Err(CliError::Data(
                    "checkpoint holds a tabular policy but the config names a continuous world"
                        .to_string(),
                ));
            }
            let setup = tabular_setup(kind, cfg)?;
            let world = TabularWorld::new(setup.mdp);
            evaluate_policy(p, &world, episodes, &mut substream(seed, stream::EVAL))
                .map_err(|e| CliError::Numerical(e.to_string()))
        }
        ckpt::LoadedPolicy::Continuous(p) => {
            if kind.is_tabular() {
                return Err(CliError::Data(
                    "checkpoint holds a continuous policy but the config names a tabular world"
                        .to_string(),
                ));
            }
            let env = point_reach_env(cfg)?;
            let world = ContinuousWorld::new(env, cfg.gamma);
            evaluate_policy(p, &world, episodes, &mut substream(seed, stream::EVAL))
                .map_err(|e| CliError::Numerical(e.to_string()))
        }
    }
}
