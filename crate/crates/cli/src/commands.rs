//! Subcommand bodies, kept free of flag parsing so tests can drive them
//! directly.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use bppo_train::JEstimate;
use offline_data::{generate_point_reach, generate_tabular, save_dataset};
use oracle_verify::{
    corollary_suite, gradient_suite, lemma1_suite, proposition1_suite,
    theorem1_adversarial_suite, theorem1_suite, theorem2_suite, theorem3_suite, theorem4_suite,
    SLACK_FLOOR,
};

use crate::ckpt;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::{train_run, train_run_named, RunOutcome};
use crate::worlds::{point_reach_env, tabular_setup, WorldKind};

/// Tolerance on the multi-route identity checks over random cases.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Looser allowance for the near-deterministic corner battery, whose value
/// solves run closer to singular.
pub const IDENTITY_CORNER_TOL: f64 = 1e-8;
/// The closed-form divergence must match the branch integral to rounding.
pub const DIVERGENCE_TOL: f64 = 1e-12;

pub const VERIFY_SCHEMA: &str = "# bppo-verify v1";
pub const VERIFY_HEADER: &str = "suite,case,statistic,value,threshold,pass";

pub const ABLATE_SCHEMA: &str = "# bppo-ablate v1";
pub const ABLATE_HEADER: &str = "run,seed,eps0,sigma,omega,step,eps,lr,loss,j_mean,accepted,in_band";

pub const DEFAULT_EPS0_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.25, 0.3];
pub const DEFAULT_SIGMA_GRID: [f64; 5] = [0.90, 0.94, 0.96, 0.98, 1.00];
pub const DEFAULT_OMEGA_GRID: [f64; 3] = [0.5, 0.7, 0.9];

/// Writes the configured world's dataset to `path`.
pub fn generate_dataset_file(cfg: &RunConfig, seed: u64, path: &Path) -> Result<(), CliError> {
    let kind = WorldKind::parse(&cfg.world)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("dataset dir {}: {e}", parent.display())))?;
    }
    match kind {
        WorldKind::TabularGrid | WorldKind::TabularBandit => {
            let setup = tabular_setup(kind, cfg)?;
            let ds = generate_tabular(
                &setup.mdp,
                &setup.behavior,
                cfg.episodes,
                seed,
                kind.name(),
                &setup.behavior_desc,
            )?;
            save_dataset(&ds, path)?;
        }
        WorldKind::PointReach => {
            let env = point_reach_env(cfg)?;
            let ds = generate_point_reach(
                &env,
                cfg.behavior_noise,
                cfg.episodes,
                seed,
                cfg.gamma,
                kind.name(),
            )?;
            save_dataset(&ds, path)?;
        }
    }
    Ok(())
}

/// `gen-dataset`: logs episodes under out_root/datasets with a name built
/// from the world, episode count, and seed.
pub fn cmd_gen_dataset(cfg: &RunConfig, seed: u64, out_root: &Path) -> Result<PathBuf, CliError> {
    let kind = WorldKind::parse(&cfg.world)?;
    let path = out_root.join("datasets").join(format!(
        "{}-e{}-s{}.ds",
        kind.name(),
        cfg.episodes,
        seed
    ));
    generate_dataset_file(cfg, seed, &path)?;
    Ok(path)
}

/// `train`: the full pipeline once per seed.
pub fn cmd_train(cfg: &RunConfig, seeds: &[u64], out_root: &Path) -> Result<Vec<RunOutcome>, CliError> {
    if seeds.is_empty() {
        return Err(CliError::Usage(
            "no seeds: pass --seed or set `seeds` in the config".to_string(),
        ));
    }
    let mut outcomes = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        outcomes.push(train_run(cfg, seed, out_root)?);
    }
    Ok(outcomes)
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub mean: f64,
    pub std_error: f64,
    pub per_seed: Vec<(u64, JEstimate)>,
    pub total_episodes: usize,
}

/// `evaluate`: scores a checkpoint with the same estimator the training
/// gate uses, pooling over seeds.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    checkpoint: &Path,
    seeds: &[u64],
    episodes: usize,
) -> Result<EvalSummary, CliError> {
    if seeds.is_empty() {
        return Err(CliError::Usage(
            "no seeds: pass --seeds or set `seeds` in the config".to_string(),
        ));
    }
    if episodes == 0 {
        return Err(CliError::Usage("episodes must be positive".to_string()));
    }
    let policy = ckpt::load_policy(checkpoint)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let j = crate::pipeline::evaluate_checkpoint(cfg, &policy, episodes, seed)?;
        per_seed.push((seed, j));
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().map(|(_, j)| j.mean).sum::<f64>() / n;
    let std_error = if per_seed.len() > 1 {
        let var = per_seed
            .iter()
            .map(|(_, j)| (j.mean - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    } else {
        per_seed[0].1.std_error
    };
    Ok(EvalSummary {
        mean,
        std_error,
        per_seed,
        total_episodes: episodes * seeds.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ReportLine {
    pub suite: &'static str,
    pub case: usize,
    pub statistic: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub lines: Vec<ReportLine>,
    pub failures: usize,
    pub report_path: PathBuf,
}

pub const VERIFY_SUITES: [&str; 9] = [
    "identity",
    "identity-corner",
    "dataset-tv",
    "behavior-bound",
    "rebased-bound",
    "replacement-gap",
    "combined-bound",
    "state-advantage",
    "gradients",
];

fn suite_lines(
    suite: &str,
    cases: usize,
    seed: u64,
    max_tv: f64,
) -> Result<Vec<ReportLine>, CliError> {
    let wrap = |e: mdp_core::MdpError| CliError::Numerical(e.to_string());
    let lines = match suite {
        "identity" => theorem1_suite(cases, seed)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| ReportLine {
                suite: "identity",
                case: i,
                statistic: "worst_abs_error",
                value: r.worst_abs_error,
                threshold: IDENTITY_TOL,
                pass: r.passes(IDENTITY_TOL),
            })
            .collect(),
        "identity-corner" => theorem1_adversarial_suite(cases, seed)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| ReportLine {
                suite: "identity-corner",
                case: i,
                statistic: "worst_abs_error",
                value: r.worst_abs_error,
                threshold: IDENTITY_CORNER_TOL,
                pass: r.passes(IDENTITY_CORNER_TOL),
            })
            .collect(),
        "dataset-tv" => proposition1_suite(cases, seed)
            .iter()
            .enumerate()
            .map(|(i, r)| ReportLine {
                suite: "dataset-tv",
                case: i,
                statistic: "abs_error",
                value: r.abs_error,
                threshold: DIVERGENCE_TOL,
                pass: r.abs_error <= DIVERGENCE_TOL,
            })
            .collect(),
        "behavior-bound" => theorem2_suite(cases, seed, max_tv)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| slack_line("behavior-bound", i, r.slack, r.pass))
            .collect(),
        "rebased-bound" => theorem3_suite(cases, seed, max_tv)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| slack_line("rebased-bound", i, r.slack, r.pass))
            .collect(),
        "replacement-gap" => theorem4_suite(cases, seed, max_tv)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| slack_line("replacement-gap", i, r.slack, r.pass))
            .collect(),
        "combined-bound" => corollary_suite(cases, seed, max_tv)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| slack_line("combined-bound", i, r.slack, r.pass))
            .collect(),
        "state-advantage" => lemma1_suite(cases, seed, max_tv)
            .map_err(wrap)?
            .iter()
            .enumerate()
            .map(|(i, r)| ReportLine {
                suite: "state-advantage",
                case: i,
                statistic: "worst_slack",
                value: r.worst_slack,
                threshold: -SLACK_FLOOR,
                pass: r.pass,
            })
            .collect(),
        "gradients" => gradient_suite(seed)
            .iter()
            .enumerate()
            .map(|(i, r)| ReportLine {
                suite: "gradients",
                case: i,
                statistic: "max_rel_error",
                value: r.max_rel_error,
                threshold: r.tolerance,
                pass: r.pass,
            })
            .collect(),
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite `{other}`; expected one of {} or all",
                VERIFY_SUITES.join(", ")
            )))
        }
    };
    Ok(lines)
}

fn slack_line(suite: &'static str, case: usize, slack: f64, pass: bool) -> ReportLine {
    ReportLine {
        suite,
        case,
        statistic: "slack",
        value: slack,
        threshold: -SLACK_FLOOR,
        pass,
    }
}

pub fn verify_report_csv(lines: &[ReportLine]) -> String {
    let mut out = String::with_capacity(64 * (2 + lines.len()));
    out.push_str(VERIFY_SCHEMA);
    out.push('\n');
    out.push_str(VERIFY_HEADER);
    out.push('\n');
    for l in lines {
        out.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{}\n",
            l.suite,
            l.case,
            l.statistic,
            l.value,
            l.threshold,
            if l.pass { 1 } else { 0 }
        ));
    }
    out
}

/// `verify`: runs one suite or the whole battery and writes a report CSV.
/// The self-test tightens an otherwise passing bound until it fails, proving
/// the harness can actually report failures.
pub fn cmd_verify(
    suite: &str,
    cases: usize,
    seed: u64,
    max_tv: f64,
    out: Option<&Path>,
    self_test: bool,
    out_root: &Path,
) -> Result<VerifyOutcome, CliError> {
    if cases == 0 {
        return Err(CliError::Usage("cases must be positive".to_string()));
    }
    let mut lines = Vec::new();
    if self_test {
        let reports = theorem2_suite(cases.min(25), seed, max_tv)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        for (i, r) in reports.iter().enumerate() {
            // Raise the right side past the exact left side, so every case
            // must report a violation.
            let slack = r.slack - (1.0 + 2.0 * r.slack.abs());
            lines.push(ReportLine {
                suite: "self-test",
                case: i,
                statistic: "slack",
                value: slack,
                threshold: -SLACK_FLOOR,
                pass: slack >= -SLACK_FLOOR,
            });
        }
    } else if suite == "all" {
        for (k, name) in VERIFY_SUITES.iter().enumerate() {
            lines.extend(suite_lines(name, cases, seed + k as u64, max_tv)?);
        }
    } else {
        lines = suite_lines(suite, cases, seed, max_tv)?;
    }

    let failures = lines.iter().filter(|l| !l.pass).count();
    let report_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out_root.join("verify_report.csv"));
    if let Some(parent) = report_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("report dir {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(&report_path, verify_report_csv(&lines))
        .map_err(|e| CliError::Data(format!("report {}: {e}", report_path.display())))?;
    Ok(VerifyOutcome {
        lines,
        failures,
        report_path,
    })
}

#[derive(Debug, Clone)]
struct AblateJob {
    cfg: RunConfig,
    seed: u64,
    run_id: String,
    eps0: f64,
    sigma: f64,
    omega: f64,
}

#[derive(Debug)]
pub struct AblateOutcome {
    pub run_ids: Vec<String>,
    pub outcomes: Vec<RunOutcome>,
    pub csv_path: Option<PathBuf>,
}

/// `ablate`: a full factorial sweep over clip size, decay, and advantage
/// asymmetry, one run per grid point per seed. Runs are independent, so
/// workers pull jobs from a shared index; the consolidated CSV is assembled
/// in grid order afterward and does not depend on the worker count.
pub fn cmd_ablate(
    cfg: &RunConfig,
    eps0_grid: &[f64],
    sigma_grid: &[f64],
    omega_grid: &[f64],
    seeds: &[u64],
    out_root: &Path,
    workers: usize,
    dry_run: bool,
) -> Result<AblateOutcome, CliError> {
    let eps0s = if eps0_grid.is_empty() {
        DEFAULT_EPS0_GRID.to_vec()
    } else {
        eps0_grid.to_vec()
    };
    let sigmas = if sigma_grid.is_empty() {
        DEFAULT_SIGMA_GRID.to_vec()
    } else {
        sigma_grid.to_vec()
    };
    let omegas = if omega_grid.is_empty() {
        DEFAULT_OMEGA_GRID.to_vec()
    } else {
        omega_grid.to_vec()
    };
    let seeds = if seeds.is_empty() {
        cfg.seeds.clone()
    } else {
        seeds.to_vec()
    };
    if seeds.is_empty() {
        return Err(CliError::Usage(
            "no seeds: pass --seeds or set `seeds` in the config".to_string(),
        ));
    }

    let ablate_root = out_root.join("ablate");
    let kind = WorldKind::parse(&cfg.world)?;

    // Datasets depend only on the seed, so they are logged once up front
    // and shared by every grid point.
    let mut dataset_paths = std::collections::BTreeMap::new();
    for &seed in &seeds {
        let path = if cfg.dataset.is_empty() {
            let p = ablate_root
                .join("datasets")
                .join(format!("{}-s{}.ds", kind.name(), seed));
            if !dry_run {
                generate_dataset_file(cfg, seed, &p)?;
            }
            p
        } else {
            PathBuf::from(&cfg.dataset)
        };
        dataset_paths.insert(seed, path);
    }

    let mut jobs = Vec::new();
    for &eps0 in &eps0s {
        for &sigma in &sigmas {
            for &omega in &omegas {
                for &seed in &seeds {
                    let mut job_cfg = cfg.clone();
                    job_cfg.eps0 = eps0;
                    job_cfg.sigma = sigma;
                    // The decay ablation moves the step size schedule in
                    // lockstep with the clip schedule.
                    job_cfg.lr_decay = sigma;
                    job_cfg.omega = omega;
                    job_cfg.dataset = dataset_paths[&seed].display().to_string();
                    let run_id = format!(
                        "ablate-{}-e{}-g{}-w{}-s{}",
                        kind.name(),
                        eps0,
                        sigma,
                        omega,
                        seed
                    );
                    jobs.push(AblateJob {
                        cfg: job_cfg,
                        seed,
                        run_id,
                        eps0,
                        sigma,
                        omega,
                    });
                }
            }
        }
    }

    let run_ids: Vec<String> = jobs.iter().map(|j| j.run_id.clone()).collect();
    if dry_run {
        return Ok(AblateOutcome {
            run_ids,
            outcomes: Vec::new(),
            csv_path: None,
        });
    }

    let slots: Vec<Mutex<Option<Result<RunOutcome, CliError>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let n_workers = workers.max(1).min(jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let outcome = train_run_named(&job.cfg, job.seed, &ablate_root, &job.run_id);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut outcomes = Vec::with_capacity(jobs.len());
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(outcome)) => outcomes.push(outcome),
            Some(Err(e)) => return Err(e),
            None => {
                return Err(CliError::Numerical(
                    "an ablation worker exited without reporting".to_string(),
                ))
            }
        }
    }

    let mut csv = String::new();
    csv.push_str(ABLATE_SCHEMA);
    csv.push('\n');
    csv.push_str(ABLATE_HEADER);
    csv.push('\n');
    for (job, outcome) in jobs.iter().zip(&outcomes) {
        for r in &outcome.records {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
                job.run_id,
                job.seed,
                job.eps0,
                job.sigma,
                job.omega,
                r.step,
                r.eps,
                r.lr,
                r.loss,
                r.j_mean,
                if r.accepted { 1 } else { 0 },
                r.ratio_in_band_fraction,
            ));
        }
    }
    let csv_path = ablate_root.join("ablation.csv");
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::Data(format!("ablation table {}: {e}", csv_path.display())))?;

    Ok(AblateOutcome {
        run_ids,
        outcomes,
        csv_path: Some(csv_path),
    })
}
