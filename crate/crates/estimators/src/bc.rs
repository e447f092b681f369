//! Behavior cloning: maximum-likelihood imitation of the logged actions.

use offline_data::{FieldCodec, OfflineDataset};
use policy_models::{Adam, StochasticPolicy};
use rand_chacha::ChaCha8Rng;

use crate::config::FitConfig;
use crate::error::EstimatorError;

/// A cloned policy with its training diagnostics.
#[derive(Debug, Clone)]
pub struct FittedPolicy<P> {
    pub policy: P,
    /// Mean log-likelihood over the full dataset at the end of training.
    pub final_log_likelihood: f64,
    /// Full-dataset mean log-likelihood sampled every `eval_every` steps,
    /// starting with the untrained policy.
    pub ll_curve: Vec<f64>,
}

/// Fits `policy` to the dataset actions by minibatch ascent on the mean
/// log-likelihood. Aborts if the training loss leaves the reals.
pub fn behavior_cloning<P>(
    dataset: &OfflineDataset<P::State, P::Action>,
    mut policy: P,
    cfg: &FitConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FittedPolicy<P>, EstimatorError>
where
    P: StochasticPolicy,
    P::State: FieldCodec,
    P::Action: FieldCodec,
{
    let mut adam = Adam::new(cfg.adam, policy.n_params());
    let mut grad = vec![0.0; policy.n_params()];
    let mut ll_curve = vec![mean_log_likelihood(dataset, &policy)];

    for step in 0..cfg.steps {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut batch_ll = 0.0;
        let indices = draw(dataset, cfg, rng);
        let scale = -1.0 / indices.len() as f64;
        for &i in &indices {
            let tr = &dataset.transitions()[i];
            batch_ll += policy.log_prob(&tr.state, &tr.action);
            policy.add_log_prob_grad(&tr.state, &tr.action, scale, &mut grad);
        }
        if !batch_ll.is_finite() {
            return Err(EstimatorError::NonFinite {
                what: "behavior cloning loss",
                step,
            });
        }
        adam.step(step, policy.params_mut(), &grad);
        policy.project_params();
        if (step + 1) % cfg.eval_every == 0 {
            ll_curve.push(mean_log_likelihood(dataset, &policy));
        }
    }

    let final_log_likelihood = mean_log_likelihood(dataset, &policy);
    Ok(FittedPolicy {
        policy,
        final_log_likelihood,
        ll_curve,
    })
}

/// Mean log pi(a|s) over every transition.
pub fn mean_log_likelihood<P>(dataset: &OfflineDataset<P::State, P::Action>, policy: &P) -> f64
where
    P: StochasticPolicy,
    P::State: FieldCodec,
    P::Action: FieldCodec,
{
    dataset
        .transitions()
        .iter()
        .map(|tr| policy.log_prob(&tr.state, &tr.action))
        .sum::<f64>()
        / dataset.len() as f64
}

fn draw<S: FieldCodec, A: FieldCodec>(
    dataset: &OfflineDataset<S, A>,
    cfg: &FitConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    if cfg.full_batch {
        (0..dataset.len()).collect()
    } else {
        dataset
            .sample_indices(cfg.batch_size.min(dataset.len()), rng)
            .expect("batch size is clamped to the dataset size")
    }
}
