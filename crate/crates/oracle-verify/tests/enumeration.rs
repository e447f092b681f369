use mdp_core::{
    random_mdp, random_policy, stream, substream, RandomMdpSpec, TabularMdp, TabularPolicy,
};
use oracle_verify::brute_force_return;
use proptest::prelude::*;

fn single_state_world(reward: f64, gamma: f64) -> TabularMdp {
    TabularMdp::new(1, 1, vec![reward], vec![1.0], vec![1.0], gamma, 10)
        .expect("one-state world is valid")
}

#[test]
fn geometric_series_world_sums_to_ten() {
    let mdp = single_state_world(1.0, 0.9);
    let pi = TabularPolicy::uniform(1, 1);
    let j = brute_force_return(&mdp, &pi, 1e-6);
    assert!((j - 10.0).abs() <= 1e-6, "got {j}");
}

#[test]
fn zero_rewards_enumerate_to_exactly_zero() {
    let mut rng = substream(11, stream::VERIFY);
    let mdp = random_mdp(&mut rng, &RandomMdpSpec::default()).scale_rewards(0.0);
    let pi = random_policy(&mut rng, 6, 3, 0.0);
    assert_eq!(brute_force_return(&mdp, &pi, 1e-9), 0.0);
}

#[test]
fn enumeration_and_linear_solve_agree_on_random_worlds() {
    let mut rng = substream(12, stream::VERIFY);
    let specs = [
        RandomMdpSpec {
            n_states: 2,
            n_actions: 2,
            ..RandomMdpSpec::default()
        },
        RandomMdpSpec::default(),
    ];
    for spec in specs {
        for _ in 0..40 {
            let mdp = random_mdp(&mut rng, &spec);
            let pi = random_policy(&mut rng, spec.n_states, spec.n_actions, 0.0);
            let exact = mdp.exact_return(&pi).expect("solvable");
            let coarse = brute_force_return(&mdp, &pi, 1e-3);
            let standard = brute_force_return(&mdp, &pi, 1e-6);
            assert!(
                (coarse - exact).abs() <= 1e-3,
                "coarse {coarse} vs exact {exact}"
            );
            assert!(
                (standard - exact).abs() <= 1e-6,
                "standard {standard} vs exact {exact}"
            );
        }
    }
}

#[test]
fn myopic_world_needs_no_tail_at_all() {
    // gamma = 0 collapses the return to the first-step reward, so even a
    // loose tolerance must come back exact.
    let mdp = TabularMdp::new(
        2,
        2,
        vec![1.0, -2.0, 0.5, 3.0],
        vec![
            0.5, 0.5, 0.25, 0.75, //
            1.0, 0.0, 0.0, 1.0,
        ],
        vec![0.5, 0.5],
        0.0,
        8,
    )
    .expect("valid world");
    let pi = TabularPolicy::uniform(2, 2);
    let expected = 0.5 * (0.5 * 1.0 + 0.5 * -2.0) + 0.5 * (0.5 * 0.5 + 0.5 * 3.0);
    let j = brute_force_return(&mdp, &pi, 0.5);
    assert!((j - expected).abs() <= 1e-15, "got {j}, want {expected}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn enumeration_respects_any_requested_tolerance(seed in any::<u64>(), tol_exp in 2u32..9) {
        let mut rng = substream(seed, stream::VERIFY);
        let spec = RandomMdpSpec::default();
        let mdp = random_mdp(&mut rng, &spec);
        let pi = random_policy(&mut rng, spec.n_states, spec.n_actions, 0.0);
        let tol = 10f64.powi(-(tol_exp as i32));
        let exact = mdp.exact_return(&pi).expect("solvable");
        let j = brute_force_return(&mdp, &pi, tol);
        prop_assert!((j - exact).abs() <= tol, "tol {tol}: {j} vs {exact}");
    }
}
