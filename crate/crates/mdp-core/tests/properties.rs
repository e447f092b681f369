//! Property tests over randomly generated worlds and policies.

use mdp_core::{
    epsilon_soft, perturbed_policy, random_mdp, random_policy, substream, tv_discrete,
    RandomMdpSpec,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Half-L1 distance between distributions is a metric on the simplex:
    /// symmetric, zero iff equal, triangle inequality.
    #[test]
    fn discrete_tv_is_a_metric(seed in 0u64..1_000_000) {
        let mut rng = substream(seed, 90);
        let p = random_policy(&mut rng, 1, 5, 0.0);
        let q = random_policy(&mut rng, 1, 5, 0.0);
        let r = random_policy(&mut rng, 1, 5, 0.0);
        let (p, q, r) = (p.row(0), q.row(0), r.row(0));

        let pq = tv_discrete(p, q);
        let qp = tv_discrete(q, p);
        prop_assert!((pq - qp).abs() <= 1e-15);
        prop_assert!(tv_discrete(p, p) == 0.0);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(pq <= tv_discrete(p, r) + tv_discrete(r, q) + 1e-12);
    }

    /// The perturbation generator respects its promised radius.
    #[test]
    fn perturbed_policy_stays_within_radius(seed in 0u64..1_000_000, radius in 0.0f64..0.5) {
        let mut rng = substream(seed, 91);
        let base = random_policy(&mut rng, 5, 4, 0.3);
        let near = perturbed_policy(&mut rng, &base, radius);
        for s in 0..5 {
            prop_assert!(near.tv(&base, s) <= radius + 1e-12);
        }
    }

    /// Epsilon-soft mixing floors every action's probability.
    #[test]
    fn epsilon_soft_floors_probabilities(seed in 0u64..1_000_000, eps in 0.01f64..1.0) {
        let mut rng = substream(seed, 92);
        let base = random_policy(&mut rng, 4, 3, 0.0);
        let soft = epsilon_soft(&base, eps);
        for s in 0..4 {
            for a in 0..3 {
                prop_assert!(soft.prob(s, a) >= eps / 3.0 - 1e-15);
            }
        }
    }

    /// Exact identities hold across the whole generator envelope.
    #[test]
    fn exact_solves_agree_on_random_worlds(seed in 0u64..1_000_000) {
        let mut rng = substream(seed, 93);
        let spec = RandomMdpSpec {
            n_states: 2 + (seed % 7) as usize,
            n_actions: 2 + (seed % 3) as usize,
            gamma: 0.5 + 0.4 * ((seed % 10) as f64 / 10.0),
            ..Default::default()
        };
        let mdp = random_mdp(&mut rng, &spec);
        let pi_new = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.05);
        let pi_old = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.05);

        let pd = mdp.performance_difference(&pi_new, &pi_old).unwrap();
        prop_assert!((pd.direct - pd.advantage_form).abs() <= 1e-9);

        let rho = mdp.visitation_frequencies(&pi_new).unwrap();
        let mass: f64 = rho.iter().sum();
        prop_assert!((mass - 1.0 / (1.0 - mdp.gamma())).abs() <= 1e-8);
    }
}
