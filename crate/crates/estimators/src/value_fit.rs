//! Fitting V to Monte-Carlo return labels with squared loss.

use offline_data::{FieldCodec, OfflineDataset};
use policy_models::{Adam, StateValueModel};
use rand_chacha::ChaCha8Rng;

use crate::config::FitConfig;
use crate::error::EstimatorError;
use crate::td::draw_indices;

/// A fitted V model with its training diagnostics.
#[derive(Debug, Clone)]
pub struct FittedV<V> {
    pub model: V,
    /// Mean squared error over the full dataset at the end of training.
    pub final_mse: f64,
    pub steps: usize,
}

/// Fits `model` to the return labels by minibatch least squares. `labels`
/// must align with `dataset.transitions()`.
pub fn fit_value<V, A>(
    dataset: &OfflineDataset<V::State, A>,
    labels: &[f64],
    model: V,
    cfg: &FitConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FittedV<V>, EstimatorError>
where
    V: StateValueModel,
    V::State: FieldCodec,
    A: FieldCodec,
{
    if labels.len() != dataset.len() {
        return Err(EstimatorError::Data(format!(
            "{} return labels for {} transitions",
            labels.len(),
            dataset.len()
        )));
    }
    let mut model = model;
    let mut adam = Adam::new(cfg.adam, model.n_params());
    let mut grad = vec![0.0; model.n_params()];

    for step in 0..cfg.steps {
        let indices = draw_indices(dataset.len(), cfg, rng);
        let n = indices.len() as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for &i in &indices {
            let s = &dataset.transitions()[i].state;
            let err = model.value(s) - labels[i];
            loss += err * err;
            model.add_value_grad(s, 2.0 * err / n, &mut grad);
        }
        if !loss.is_finite() {
            return Err(EstimatorError::NonFinite {
                what: "value fit loss",
                step,
            });
        }
        adam.step(step, model.params_mut(), &grad);
    }

    let final_mse = dataset
        .transitions()
        .iter()
        .zip(labels)
        .map(|(tr, g)| (model.value(&tr.state) - g).powi(2))
        .sum::<f64>()
        / dataset.len() as f64;
    Ok(FittedV {
        model,
        final_mse,
        steps: cfg.steps,
    })
}
