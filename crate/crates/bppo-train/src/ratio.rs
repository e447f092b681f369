use offline_data::{FieldCodec, OfflineDataset};
use policy_models::StochasticPolicy;
use rand_chacha::ChaCha8Rng;

/// Distribution summary of pi(a|s) / behavior(a|s) with a ~ behavior.
#[derive(Debug, Clone, Copy)]
pub struct RatioSummary {
    pub mean_abs_deviation: f64,
    /// Fraction of finite ratios inside [1 - 2*eps, 1 + 2*eps].
    pub in_band_fraction: f64,
    pub band: (f64, f64),
    pub samples: usize,
    /// Ratios that overflowed and were left out of the statistics.
    pub dropped: usize,
}

/// One importance ratio per state in `states`, action drawn from the
/// behavior policy. Non-finite ratios are kept so callers can count them.
pub fn ratio_samples<P: StochasticPolicy>(
    pi: &P,
    behavior: &P,
    states: &[P::State],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    states
        .iter()
        .map(|s| {
            let a = behavior.sample_action(s, rng);
            (pi.log_prob(s, &a) - behavior.log_prob(s, &a)).exp()
        })
        .collect()
}

/// Summarizes a slice of importance ratios against the clip band for `eps`.
pub fn summarize_ratios(ratios: &[f64], eps: f64) -> RatioSummary {
    let band = (1.0 - 2.0 * eps, 1.0 + 2.0 * eps);
    let mut kept = 0usize;
    let mut dropped = 0usize;
    let mut abs_dev = 0.0;
    let mut in_band = 0usize;
    for &r in ratios {
        if !r.is_finite() {
            dropped += 1;
            continue;
        }
        kept += 1;
        abs_dev += (r - 1.0).abs();
        if r >= band.0 && r <= band.1 {
            in_band += 1;
        }
    }
    let denom = kept.max(1) as f64;
    RatioSummary {
        mean_abs_deviation: abs_dev / denom,
        in_band_fraction: in_band as f64 / denom,
        band,
        samples: kept,
        dropped,
    }
}

/// Ratio statistics over every dataset state, one behavior action each.
pub fn ratio_trace<P>(
    pi: &P,
    behavior: &P,
    dataset: &OfflineDataset<P::State, P::Action>,
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> RatioSummary
where
    P: StochasticPolicy,
    P::State: FieldCodec,
    P::Action: FieldCodec,
{
    let states: Vec<P::State> = dataset
        .transitions()
        .iter()
        .map(|tr| tr.state.clone())
        .collect();
    let ratios = ratio_samples(pi, behavior, &states, rng);
    summarize_ratios(&ratios, eps)
}
