//! Random MDP, policy, and perturbation generators.
//!
//! These feed both the property tests and the verification batteries. The
//! important knobs are the uniform mixture folded into every transition row,
//! which keeps the generated chains fast-mixing, and the perturbation radius
//! control, which produces policy pairs at a known maximum total-variation
//! distance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{TabularMdp, TabularPolicy};

/// Shape parameters for `random_mdp`.
#[derive(Debug, Clone, Copy)]
pub struct RandomMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub horizon: usize,
    /// Weight of the uniform distribution mixed into every transition row
    /// and into the initial distribution. Positive values bound the chain's
    /// second eigenvalue away from one.
    pub uniform_mix: f64,
    /// Rewards are drawn uniformly from [-reward_scale, reward_scale].
    pub reward_scale: f64,
}

impl Default for RandomMdpSpec {
    fn default() -> Self {
        Self {
            n_states: 6,
            n_actions: 3,
            gamma: 0.9,
            horizon: 60,
            uniform_mix: 0.2,
            reward_scale: 1.0,
        }
    }
}

/// Draws a dense random MDP according to `spec`.
pub fn random_mdp(rng: &mut ChaCha8Rng, spec: &RandomMdpSpec) -> TabularMdp {
    let (s, a) = (spec.n_states, spec.n_actions);
    let mut reward = Vec::with_capacity(s * a);
    for _ in 0..s * a {
        reward.push(rng.random_range(-spec.reward_scale..=spec.reward_scale));
    }
    let mut transition = Vec::with_capacity(s * a * s);
    for _ in 0..s * a {
        transition.extend(random_simplex_row(rng, s, spec.uniform_mix));
    }
    let initial_dist = random_simplex_row(rng, s, spec.uniform_mix);
    TabularMdp::new(s, a, reward, transition, initial_dist, spec.gamma, spec.horizon)
        .expect("generated tables satisfy the constructor invariants")
}

/// Draws a random policy whose rows mix a flat Dirichlet draw with the
/// uniform distribution at weight `uniform_mix`.
pub fn random_policy(
    rng: &mut ChaCha8Rng,
    n_states: usize,
    n_actions: usize,
    uniform_mix: f64,
) -> TabularPolicy {
    let mut probs = Vec::with_capacity(n_states * n_actions);
    for _ in 0..n_states {
        probs.extend(random_simplex_row(rng, n_actions, uniform_mix));
    }
    TabularPolicy::new(n_states, n_actions, probs)
        .expect("generated rows satisfy the constructor invariants")
}

/// Mixes `base` with the uniform policy at weight `eps`, guaranteeing every
/// action keeps probability at least eps / n_actions.
pub fn epsilon_soft(base: &TabularPolicy, eps: f64) -> TabularPolicy {
    assert!((0.0..=1.0).contains(&eps), "eps must lie in [0, 1]");
    let a = base.n_actions() as f64;
    TabularPolicy::from_weights(base.n_states(), base.n_actions(), |s, ac| {
        (1.0 - eps) * base.prob(s, ac) + eps / a
    })
    .expect("mixture rows are valid distributions")
}

/// Perturbs `base` into a nearby policy with per-state total variation at
/// most `max_radius`. Each state gets a zero-sum random direction scaled to
/// a drawn radius, shrunk further if needed to keep probabilities
/// nonnegative, so the bound on the radius is exact rather than approximate.
pub fn perturbed_policy(
    rng: &mut ChaCha8Rng,
    base: &TabularPolicy,
    max_radius: f64,
) -> TabularPolicy {
    assert!((0.0..=1.0).contains(&max_radius), "radius must lie in [0, 1]");
    let (s_n, a_n) = (base.n_states(), base.n_actions());
    let mut probs = Vec::with_capacity(s_n * a_n);
    for s in 0..s_n {
        let row = base.row(s);
        let target: f64 = rng.random_range(0.0..=1.0) * max_radius;
        let mut delta: Vec<f64> = (0..a_n)
            .map(|_| rand_distr::StandardNormal.sample(rng))
            .collect();
        let mean = delta.iter().sum::<f64>() / a_n as f64;
        for d in &mut delta {
            *d -= mean;
        }
        let half_l1 = 0.5 * delta.iter().map(|d| d.abs()).sum::<f64>();
        let mut scale = if half_l1 > 0.0 { target / half_l1 } else { 0.0 };
        for (d, p) in delta.iter().zip(row) {
            if *d < 0.0 {
                scale = scale.min(p / (-d));
            }
        }
        let mut out: Vec<f64> = delta
            .iter()
            .zip(row)
            .map(|(d, p)| (p + scale * d).max(0.0))
            .collect();
        // Compensate float drift so the row sums exactly like the base row.
        let drift: f64 = row.iter().sum::<f64>() - out.iter().sum::<f64>();
        out[a_n - 1] = (out[a_n - 1] + drift).max(0.0);
        probs.extend(out);
    }
    TabularPolicy::new(s_n, a_n, probs).expect("perturbed rows remain valid distributions")
}

use rand_distr::Distribution;

fn random_simplex_row(rng: &mut ChaCha8Rng, len: usize, uniform_mix: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&uniform_mix), "mix must lie in [0, 1]");
    // Normalized unit exponentials give a flat Dirichlet draw.
    let mut row: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = row.iter().sum();
    let flat = uniform_mix / len as f64;
    for p in &mut row {
        *p = (1.0 - uniform_mix) * (*p / total) + flat;
    }
    // Compensate float drift so the constructor's row-sum check is exact.
    let sum: f64 = row.iter().sum();
    row[len - 1] += 1.0 - sum;
    row
}
