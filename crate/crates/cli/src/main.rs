use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cli::commands::{cmd_ablate, cmd_evaluate, cmd_gen_dataset, cmd_train, cmd_verify};
use cli::config::RunConfig;
use cli::error::CliError;
use cli::resolve_out_root;

#[derive(Parser)]
#[command(
    name = "bppo",
    version,
    about = "Offline policy improvement laboratory: datasets, training, evaluation, certification, ablations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log behavior episodes on a world and write the dataset file.
    GenDataset {
        /// World to log on: tabular-grid, tabular-bandit, or point-reach.
        #[arg(long)]
        env: String,
        /// Number of episodes to log.
        #[arg(long)]
        episodes: usize,
        /// Logging seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional config supplying world parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output root; the file lands under <out>/datasets.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clone the logger, fit its values, and run gated policy improvement.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Single seed overriding the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Loop variant override: replacement, iterative, or onestep.
        #[arg(long)]
        variant: Option<String>,
        /// Dataset path override.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a saved policy checkpoint, pooling over seeds.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Evaluation seeds; defaults to the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
    },
    /// Run the numerical certification batteries and write a report.
    Verify {
        /// Suite name, or `all` for the full battery.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Randomized cases per suite.
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Policy-step radius for the bound batteries.
        #[arg(long, default_value_t = 0.2)]
        max_tv: f64,
        /// Exact report file; defaults to <out>/verify_report.csv.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Tighten a passing bound until it fails, proving failures surface.
        #[arg(long)]
        self_test: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep clip size, clip decay, and advantage asymmetry.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        /// Clip sizes; defaults to the published five-point grid.
        #[arg(long, value_delimiter = ',')]
        eps0: Vec<f64>,
        /// Decay factors; defaults to the published five-point grid.
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        /// Advantage asymmetry weights; defaults to the published triple.
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
        /// Seeds; defaults to the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Worker threads pulling runs from the grid.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Print the run ids without training anything.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenDataset {
            env,
            episodes,
            seed,
            config,
            out,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            cfg.world = env;
            cfg.episodes = episodes;
            let out_root = resolve_out_root(out.as_deref(), &cfg.out);
            let path = cmd_gen_dataset(&cfg, seed, &out_root)?;
            println!("dataset {}", path.display());
        }
        Command::Train {
            config,
            seed,
            variant,
            dataset,
            out,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if let Some(d) = dataset {
                cfg.dataset = d.display().to_string();
            }
            let seeds = match seed {
                Some(s) => vec![s],
                None => cfg.seeds.clone(),
            };
            let out_root = resolve_out_root(out.as_deref(), &cfg.out);
            let outcomes = cmd_train(&cfg, &seeds, &out_root)?;
            for o in &outcomes {
                println!(
                    "run {}: J(clone) {:.6}, J(final) {:.6}, gate accepted {}/{} steps",
                    o.run_id, o.behavior_j, o.final_j, o.accepted, o.steps
                );
                println!("  wrote {}", o.run_dir.display());
            }
        }
        Command::Evaluate {
            config,
            checkpoint,
            seeds,
            episodes,
        } => {
            let cfg = RunConfig::load(&config)?;
            let seeds = if seeds.is_empty() { cfg.seeds.clone() } else { seeds };
            let summary = cmd_evaluate(&cfg, &checkpoint, &seeds, episodes)?;
            for (seed, j) in &summary.per_seed {
                println!("seed {}: J {:.6} +/- {:.6}", seed, j.mean, j.std_error);
            }
            println!(
                "mean {:.6} +/- {:.6} over {} episodes",
                summary.mean, summary.std_error, summary.total_episodes
            );
        }
        Command::Verify {
            suite,
            cases,
            seed,
            max_tv,
            report,
            self_test,
            out,
        } => {
            let out_root = resolve_out_root(out.as_deref(), "");
            let outcome = cmd_verify(
                &suite,
                cases,
                seed,
                max_tv,
                report.as_deref(),
                self_test,
                &out_root,
            )?;
            let mut current = "";
            let mut suite_pass = 0usize;
            let mut suite_fail = 0usize;
            let flush = |name: &str, pass: usize, fail: usize| {
                if !name.is_empty() {
                    println!("suite {name}: {pass} passed, {fail} failed");
                }
            };
            for l in &outcome.lines {
                println!(
                    "{} case {}: {} {:.3e} (threshold {:.3e}) {}",
                    l.suite,
                    l.case,
                    l.statistic,
                    l.value,
                    l.threshold,
                    if l.pass { "pass" } else { "FAIL" }
                );
                if l.suite != current {
                    flush(current, suite_pass, suite_fail);
                    current = l.suite;
                    suite_pass = 0;
                    suite_fail = 0;
                }
                if l.pass {
                    suite_pass += 1;
                } else {
                    suite_fail += 1;
                }
            }
            flush(current, suite_pass, suite_fail);
            println!("report {}", outcome.report_path.display());
            if outcome.failures > 0 {
                return Err(CliError::Verification(format!(
                    "{} of {} cases failed",
                    outcome.failures,
                    outcome.lines.len()
                )));
            }
            println!("{} cases, 0 failures", outcome.lines.len());
        }
        Command::Ablate {
            config,
            eps0,
            sigma,
            omega,
            seeds,
            workers,
            dry_run,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let out_root = resolve_out_root(out.as_deref(), &cfg.out);
            let outcome = cmd_ablate(
                &cfg, &eps0, &sigma, &omega, &seeds, &out_root, workers, dry_run,
            )?;
            if dry_run {
                for id in &outcome.run_ids {
                    println!("{id}");
                }
                println!("{} runs", outcome.run_ids.len());
            } else {
                for o in &outcome.outcomes {
                    println!(
                        "run {}: J(clone) {:.6}, J(final) {:.6}, gate accepted {}/{} steps",
                        o.run_id, o.behavior_j, o.final_j, o.accepted, o.steps
                    );
                }
                if let Some(path) = &outcome.csv_path {
                    println!("table {}", path.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(if code == 0 { 0 } else { 2 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
