//! Independent oracles and numerical certification for the theory behind
//! behavior proximal policy optimization.
//!
//! The training crates promise that their surrogates and penalties relate to
//! true policy performance in specific ways; this crate checks those claims
//! with brute force instead of trust. Returns are re-derived by trajectory
//! enumeration with no shared code with the linear solvers, occupancies are
//! read exactly off logged episodes, every bound is evaluated on both sides,
//! and every analytic gradient is compared against central differences.
//! Randomized batteries drive the whole set at volume from purpose-keyed
//! RNG streams, so each certification is reproducible case by case.

mod battery;
mod bounds;
mod enumerate;
mod gradcheck;
mod occupancy;
mod report;

pub use battery::{
    corollary_suite, gradient_suite, lemma1_suite, median_slack, proposition1_suite,
    random_bound_case, theorem1_adversarial_suite, theorem1_suite, theorem2_suite,
    theorem3_suite, theorem4_suite, BoundCase, CaseSpec, GradReport, Prop1Case,
};
pub use bounds::{
    corollary_bound, pointmass_tv_branch_sum, theorem2_bound, theorem3_bound, theorem4_gap,
    verify_lemma1, verify_theorem1,
};
pub use enumerate::brute_force_return;
pub use gradcheck::{check_gradients, PROBE_DENOM_FLOOR, PROBE_STEP};
pub use occupancy::DatasetOccupancy;
pub use report::{BoundReport, GapReport, IdentityReport, PerStateReport, SLACK_FLOOR};
