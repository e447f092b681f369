//! Policy save and restore on top of the binary checkpoint container.
//!
//! Tabular policies store their logits under one shaped entry. Continuous
//! policies store the architecture (dims as floats, which is lossless for
//! the small integers involved) next to the flat parameter vector, so a
//! checkpoint alone is enough to rebuild the network.

use std::path::Path;

use mdp_core::substream;
use policy_models::{
    load_checkpoint, save_checkpoint, CheckpointEntry, GaussianMlpPolicy, SoftmaxPolicy,
    StochasticPolicy,
};

use crate::error::CliError;

const SOFTMAX_LOGITS: &str = "softmax.logits";
const GAUSSIAN_ARCH: &str = "gaussian.arch";
const GAUSSIAN_PARAMS: &str = "gaussian.params";

fn wrap<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Data(format!("checkpoint {}: {e}", path.display()))
}

pub fn save_softmax(path: &Path, policy: &SoftmaxPolicy) -> Result<(), CliError> {
    let entry = CheckpointEntry {
        name: SOFTMAX_LOGITS.to_string(),
        dims: vec![policy.n_states() as u64, policy.n_actions() as u64],
        data: policy.params().to_vec(),
    };
    save_checkpoint(path, &[entry]).map_err(wrap(path))
}

pub fn load_softmax(path: &Path) -> Result<SoftmaxPolicy, CliError> {
    let entries = load_checkpoint(path).map_err(wrap(path))?;
    let entry = entries
        .iter()
        .find(|e| e.name == SOFTMAX_LOGITS)
        .ok_or_else(|| {
            CliError::Data(format!(
                "checkpoint {}: no `{SOFTMAX_LOGITS}` entry, not a tabular policy",
                path.display()
            ))
        })?;
    if entry.dims.len() != 2 {
        return Err(CliError::Data(format!(
            "checkpoint {}: `{SOFTMAX_LOGITS}` should be rank 2, found rank {}",
            path.display(),
            entry.dims.len()
        )));
    }
    Ok(SoftmaxPolicy::from_logits(
        entry.dims[0] as usize,
        entry.dims[1] as usize,
        entry.data.clone(),
    ))
}

pub fn save_gaussian(path: &Path, policy: &GaussianMlpPolicy) -> Result<(), CliError> {
    let widths = policy.trunk().widths();
    let mut arch = vec![policy.state_dim() as f64, policy.action_dim() as f64];
    arch.extend(widths[1..widths.len() - 1].iter().map(|&w| w as f64));
    let entries = [
        CheckpointEntry::flat(GAUSSIAN_ARCH, &arch),
        CheckpointEntry::flat(GAUSSIAN_PARAMS, policy.params()),
    ];
    save_checkpoint(path, &entries).map_err(wrap(path))
}

pub fn load_gaussian(path: &Path) -> Result<GaussianMlpPolicy, CliError> {
    let entries = load_checkpoint(path).map_err(wrap(path))?;
    let find = |name: &str| {
        entries.iter().find(|e| e.name == name).ok_or_else(|| {
            CliError::Data(format!(
                "checkpoint {}: no `{name}` entry, not a continuous policy",
                path.display()
            ))
        })
    };
    let arch = find(GAUSSIAN_ARCH)?;
    if arch.data.len() < 2 {
        return Err(CliError::Data(format!(
            "checkpoint {}: `{GAUSSIAN_ARCH}` needs state and action dims",
            path.display()
        )));
    }
    let state_dim = arch.data[0] as usize;
    let action_dim = arch.data[1] as usize;
    let hidden: Vec<usize> = arch.data[2..].iter().map(|&w| w as usize).collect();
    // The init values are immediately overwritten, any seed works here.
    let mut policy =
        GaussianMlpPolicy::new(state_dim, action_dim, &hidden, -1.0, &mut substream(0, 0));
    let params = find(GAUSSIAN_PARAMS)?;
    if params.data.len() != policy.n_params() {
        return Err(CliError::Data(format!(
            "checkpoint {}: parameter count {} does not match the declared architecture ({} expected)",
            path.display(),
            params.data.len(),
            policy.n_params()
        )));
    }
    policy.params_mut().copy_from_slice(&params.data);
    policy.project_params();
    Ok(policy)
}

/// What kind of policy a checkpoint holds, judged by its entry names.
pub enum LoadedPolicy {
    Tabular(SoftmaxPolicy),
    Continuous(GaussianMlpPolicy),
}

pub fn load_policy(path: &Path) -> Result<LoadedPolicy, CliError> {
    let entries = load_checkpoint(path).map_err(wrap(path))?;
    if entries.iter().any(|e| e.name == SOFTMAX_LOGITS) {
        load_softmax(path).map(LoadedPolicy::Tabular)
    } else if entries.iter().any(|e| e.name == GAUSSIAN_ARCH) {
        load_gaussian(path).map(LoadedPolicy::Continuous)
    } else {
        Err(CliError::Data(format!(
            "checkpoint {}: unrecognized entries, expected a policy",
            path.display()
        )))
    }
}
