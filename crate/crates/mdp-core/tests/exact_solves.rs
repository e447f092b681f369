//! Exact-evaluation checks: Bellman residuals, analytic closed forms, and
//! the agreement between independent expressions of the same quantity.

use mdp_core::{random_mdp, random_policy, substream, RandomMdpSpec, TabularMdp, TabularPolicy};

/// Two-state chain: action 0 stays, action 1 hops to the other state.
/// Rewards depend only on the state, so values have closed forms.
fn two_state_chain(gamma: f64) -> TabularMdp {
    let reward = vec![1.0, 1.0, 0.0, 0.0];
    #[rustfmt::skip]
    let transition = vec![
        // s=0: stay, hop
        1.0, 0.0,
        0.0, 1.0,
        // s=1: stay, hop
        0.0, 1.0,
        1.0, 0.0,
    ];
    TabularMdp::new(2, 2, reward, transition, vec![1.0, 0.0], gamma, 50).unwrap()
}

#[test]
fn stay_forever_value_is_geometric_series() {
    let mdp = two_state_chain(0.9);
    let stay = TabularPolicy::new(2, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
    let v = mdp.exact_state_values(&stay).unwrap();
    assert!((v[0] - 10.0).abs() < 1e-10, "V(0) = {}", v[0]);
    assert!((v[1] - 0.0).abs() < 1e-10, "V(1) = {}", v[1]);
    assert!((mdp.exact_return(&stay).unwrap() - 10.0).abs() < 1e-10);
}

#[test]
fn alternating_value_matches_hand_solution() {
    // Always hop from s0: rewards 1, 0, 1, 0, ... so V(0) = 1/(1-g^2).
    let gamma: f64 = 0.8;
    let mdp = two_state_chain(gamma);
    let hop = TabularPolicy::new(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
    let v = mdp.exact_state_values(&hop).unwrap();
    let expect0 = 1.0 / (1.0 - gamma * gamma);
    let expect1 = gamma / (1.0 - gamma * gamma);
    assert!((v[0] - expect0).abs() < 1e-12);
    assert!((v[1] - expect1).abs() < 1e-12);
}

#[test]
fn gamma_zero_values_are_immediate_rewards() {
    let mut rng = substream(41, 0);
    let spec = RandomMdpSpec {
        gamma: 0.0,
        ..Default::default()
    };
    let mdp = random_mdp(&mut rng, &spec);
    let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
    let v = mdp.exact_state_values(&pi).unwrap();
    for s in 0..mdp.n_states() {
        let expect: f64 = (0..mdp.n_actions())
            .map(|a| pi.prob(s, a) * mdp.reward(s, a))
            .sum();
        assert!((v[s] - expect).abs() < 1e-12);
    }
    let q = mdp.exact_action_values(&pi).unwrap();
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            assert!((q[s * mdp.n_actions() + a] - mdp.reward(s, a)).abs() < 1e-12);
        }
    }
}

#[test]
fn bellman_residual_below_budget_on_random_cases() {
    let mut rng = substream(42, 0);
    for case in 0..50 {
        let spec = RandomMdpSpec {
            n_states: 3 + case % 6,
            n_actions: 2 + case % 3,
            gamma: [0.5, 0.9, 0.99][case % 3],
            ..Default::default()
        };
        let mdp = random_mdp(&mut rng, &spec);
        let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
        let v = mdp.exact_state_values(&pi).unwrap();
        let q = mdp.exact_action_values(&pi).unwrap();
        for s in 0..mdp.n_states() {
            // V(s) = sum_a pi(a|s) Q(s,a)
            let vq: f64 = (0..mdp.n_actions())
                .map(|a| pi.prob(s, a) * q[s * mdp.n_actions() + a])
                .sum();
            assert!(
                (v[s] - vq).abs() <= 1e-10,
                "case {case}: Bellman residual {} at state {s}",
                (v[s] - vq).abs()
            );
        }
    }
}

#[test]
fn advantage_has_zero_policy_mean_per_state() {
    let mut rng = substream(43, 0);
    let mdp = random_mdp(&mut rng, &RandomMdpSpec::default());
    let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
    let adv = mdp.exact_advantage(&pi).unwrap();
    for s in 0..mdp.n_states() {
        let mean: f64 = (0..mdp.n_actions())
            .map(|a| pi.prob(s, a) * adv[s * mdp.n_actions() + a])
            .sum();
        assert!(mean.abs() <= 1e-10, "state {s}: E_pi[A] = {mean}");
    }
}

#[test]
fn visitation_mass_is_inverse_horizon_factor() {
    let mut rng = substream(44, 0);
    for gamma in [0.3, 0.9, 0.97] {
        let spec = RandomMdpSpec {
            gamma,
            ..Default::default()
        };
        let mdp = random_mdp(&mut rng, &spec);
        let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
        let rho = mdp.visitation_frequencies(&pi).unwrap();
        let mass: f64 = rho.iter().sum();
        assert!(
            (mass - 1.0 / (1.0 - gamma)).abs() < 1e-9,
            "gamma {gamma}: mass {mass}"
        );
        assert!(rho.iter().all(|r| *r >= 0.0));
    }
}

#[test]
fn return_equals_occupancy_weighted_reward() {
    // J(pi) = sum_s rho_pi(s) * r_pi(s): an independent identity tying the
    // value solve to the occupancy solve.
    let mut rng = substream(45, 0);
    for _ in 0..20 {
        let mdp = random_mdp(&mut rng, &RandomMdpSpec::default());
        let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
        let j = mdp.exact_return(&pi).unwrap();
        let rho = mdp.visitation_frequencies(&pi).unwrap();
        let j_occ: f64 = (0..mdp.n_states())
            .map(|s| {
                let r_pi: f64 = (0..mdp.n_actions())
                    .map(|a| pi.prob(s, a) * mdp.reward(s, a))
                    .sum();
                rho[s] * r_pi
            })
            .sum();
        assert!((j - j_occ).abs() <= 1e-9, "J {j} vs occupancy form {j_occ}");
    }
}

#[test]
fn performance_difference_forms_agree() {
    let mut rng = substream(46, 0);
    for _ in 0..50 {
        let mdp = random_mdp(&mut rng, &RandomMdpSpec::default());
        let pi_new = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.05);
        let pi_old = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.05);
        let pd = mdp.performance_difference(&pi_new, &pi_old).unwrap();
        assert!(
            (pd.direct - pd.advantage_form).abs() <= 1e-9,
            "direct {} vs advantage form {}",
            pd.direct,
            pd.advantage_form
        );
    }
}

#[test]
fn same_policy_performance_difference_is_zero() {
    let mut rng = substream(47, 0);
    let mdp = random_mdp(&mut rng, &RandomMdpSpec::default());
    let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
    let pd = mdp.performance_difference(&pi, &pi).unwrap();
    assert!(pd.direct.abs() <= 1e-10);
    assert!(pd.advantage_form.abs() <= 1e-10);
}

#[test]
fn constructor_rejects_bad_tables() {
    // Row not summing to one.
    let err = TabularMdp::new(
        1,
        1,
        vec![0.0],
        vec![0.9],
        vec![1.0],
        0.9,
        10,
    );
    assert!(err.is_err());
    // Negative probability.
    let err = TabularMdp::new(
        1,
        2,
        vec![0.0, 0.0],
        vec![1.5, -0.5, 1.0, 0.0],
        vec![1.0],
        0.9,
        10,
    );
    assert!(err.is_err());
    // Gamma out of range.
    let err = TabularMdp::new(1, 1, vec![0.0], vec![1.0], vec![1.0], 1.0, 10);
    assert!(err.is_err());
    // Policy row mismatch.
    assert!(TabularPolicy::new(2, 2, vec![0.6, 0.5, 1.0, 0.0]).is_err());
}

#[test]
fn reward_scaling_scales_values_linearly() {
    let mut rng = substream(48, 0);
    let mdp = random_mdp(&mut rng, &RandomMdpSpec::default());
    let pi = random_policy(&mut rng, mdp.n_states(), mdp.n_actions(), 0.1);
    let scaled = mdp.scale_rewards(3.5);
    let j = mdp.exact_return(&pi).unwrap();
    let js = scaled.exact_return(&pi).unwrap();
    assert!((js - 3.5 * j).abs() < 1e-9);
}
