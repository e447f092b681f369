//! Batch experiment front end for the offline improvement laboratory.
//!
//! The binary (`bppo`) wraps five subcommands: `gen-dataset` logs behavior
//! episodes, `train` runs clone - fit - improve end to end, `evaluate`
//! scores saved checkpoints, `verify` drives the certification batteries,
//! and `ablate` sweeps the schedule hyperparameters. Everything the binary
//! does lives here as library code so the flows are testable in-process;
//! `main.rs` only parses flags and maps errors to exit codes.

pub mod ckpt;
pub mod commands;
pub mod config;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod worlds;

use std::path::{Path, PathBuf};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "BPPO_OUT_ROOT";

/// Output root precedence: explicit flag, config `out`, environment
/// variable, then `runs` in the working directory.
pub fn resolve_out_root(flag: Option<&Path>, cfg_out: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if !cfg_out.is_empty() {
        return PathBuf::from(cfg_out);
    }
    if let Ok(v) = std::env::var(OUT_ROOT_ENV) {
        if !v.is_empty() {
            return PathBuf::from(v);
        }
    }
    PathBuf::from("runs")
}
