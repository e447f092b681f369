use mdp_core::{rollout_continuous, MdpError, PointReach, TabularMdp};
use policy_models::{GaussianMlpPolicy, SoftmaxPolicy, StochasticPolicy};
use rand_chacha::ChaCha8Rng;

/// A discounted-return estimate with its sampling uncertainty. Exact
/// evaluations report zero standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// A task a policy can be scored on. Worlds pin their policy representation:
/// the tabular world scores softmax tables by an exact solve, the sampled
/// world scores Gaussian networks by rollouts.
pub trait World {
    type Policy: StochasticPolicy + Clone;

    fn evaluate(
        &self,
        policy: &Self::Policy,
        n_episodes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<JEstimate, MdpError>;
}

pub struct TabularWorld {
    mdp: TabularMdp,
}

impl TabularWorld {
    pub fn new(mdp: TabularMdp) -> Self {
        Self { mdp }
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }
}

impl World for TabularWorld {
    type Policy = SoftmaxPolicy;

    fn evaluate(
        &self,
        policy: &SoftmaxPolicy,
        _n_episodes: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<JEstimate, MdpError> {
        let mean = self.mdp.exact_return(&policy.to_tabular())?;
        Ok(JEstimate {
            mean,
            std_error: 0.0,
        })
    }
}

pub struct ContinuousWorld {
    env: PointReach,
    gamma: f64,
}

impl ContinuousWorld {
    pub fn new(env: PointReach, gamma: f64) -> Self {
        assert!((0.0..1.0).contains(&gamma), "discount must lie in [0, 1)");
        Self { env, gamma }
    }

    pub fn env(&self) -> &PointReach {
        &self.env
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl World for ContinuousWorld {
    type Policy = GaussianMlpPolicy;

    fn evaluate(
        &self,
        policy: &GaussianMlpPolicy,
        n_episodes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<JEstimate, MdpError> {
        assert!(n_episodes >= 1, "need at least one evaluation episode");
        let mut returns = Vec::with_capacity(n_episodes);
        for _ in 0..n_episodes {
            let traj = rollout_continuous(
                &self.env,
                |s: &[f64], r: &mut ChaCha8Rng| policy.sample_action(&s.to_vec(), r),
                rng,
            )?;
            returns.push(traj.discounted_return(self.gamma));
        }
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let std_error = if returns.len() > 1 {
            let var = returns.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(JEstimate { mean, std_error })
    }
}

/// Scores a policy on its world. Kept as a free function so callers outside
/// the training loop get the same gate estimator the loop uses.
pub fn evaluate_policy<W: World>(
    policy: &W::Policy,
    world: &W,
    n_episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<JEstimate, MdpError> {
    world.evaluate(policy, n_episodes, rng)
}
