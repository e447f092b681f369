//! Report types produced by the certification routines.
//!
//! Every routine evaluates both sides of its statement exactly and returns
//! the numbers rather than a bare boolean, so a failure can be diagnosed from
//! the report alone. Slack is always oriented so that nonnegative means the
//! statement held; the shared floor below absorbs float noise from the linear
//! solves without letting a real violation through.

/// How far below zero a slack may sit before the check is declared failed.
pub const SLACK_FLOOR: f64 = 1e-9;

/// One evaluated lower bound of the form J_delta >= surrogate - penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Which bound this is, such as "theorem2".
    pub name: &'static str,
    /// The exact performance difference the bound constrains.
    pub left: f64,
    /// The evaluated bound: surrogate minus the sum of penalties.
    pub right: f64,
    /// left - right; the bound holds when this is nonnegative.
    pub slack: f64,
    /// The dataset-weighted expected advantage the bound is built around.
    pub surrogate: f64,
    /// Every penalty term, in statement order, as subtracted magnitudes.
    pub penalties: Vec<f64>,
    /// max_{s,a} |A(s,a)| for the advantage the bound references.
    pub max_abs_advantage: f64,
    /// max_s TV between the candidate and its reference policy.
    pub max_tv: f64,
    /// Occupancy-weighted total variation from the first penalty term.
    pub expected_tv: f64,
    /// Occupancy-weighted (1 - prob of the logged action) over the dataset.
    pub dataset_mismatch: f64,
    pub pass: bool,
}

impl BoundReport {
    pub(crate) fn lower_bound(
        name: &'static str,
        left: f64,
        surrogate: f64,
        penalties: Vec<f64>,
        max_abs_advantage: f64,
        max_tv: f64,
        expected_tv: f64,
        dataset_mismatch: f64,
    ) -> Self {
        let right = surrogate - penalties.iter().sum::<f64>();
        let slack = left - right;
        Self {
            name,
            left,
            right,
            slack,
            surrogate,
            penalties,
            max_abs_advantage,
            max_tv,
            expected_tv,
            dataset_mismatch,
            pass: slack >= -SLACK_FLOOR,
        }
    }
}

/// One evaluated two-sided gap of the form |difference| <= bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub name: &'static str,
    /// The absolute difference being bounded.
    pub gap: f64,
    /// The evaluated right side.
    pub bound: f64,
    /// bound - gap; the statement holds when this is nonnegative.
    pub slack: f64,
    /// Occupancy-weighted total variation driving the bound.
    pub expected_tv: f64,
    pub pass: bool,
}

impl GapReport {
    pub(crate) fn new(name: &'static str, gap: f64, bound: f64, expected_tv: f64) -> Self {
        let slack = bound - gap;
        Self {
            name,
            gap,
            bound,
            slack,
            expected_tv,
            pass: slack >= -SLACK_FLOOR,
        }
    }
}

/// An identity evaluated along independent computational routes.
///
/// `direct` comes from two value solves, `occupancy_form` from a visitation
/// solve, and `trajectory_form` from truncated power-series enumeration; in
/// exact arithmetic all three are the same number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// J(pi_new) - J(pi_old) from the value solves.
    pub direct: f64,
    /// Expected discounted advantage sum over enumerated trajectories.
    pub trajectory_form: f64,
    /// Visitation-weighted expected advantage.
    pub occupancy_form: f64,
    /// Largest pairwise absolute discrepancy among the three routes.
    pub worst_abs_error: f64,
}

impl IdentityReport {
    pub(crate) fn new(direct: f64, trajectory_form: f64, occupancy_form: f64) -> Self {
        let worst_abs_error = (trajectory_form - direct)
            .abs()
            .max((occupancy_form - direct).abs())
            .max((trajectory_form - occupancy_form).abs());
        Self {
            direct,
            trajectory_form,
            occupancy_form,
            worst_abs_error,
        }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.worst_abs_error <= tolerance
    }
}

/// An inequality checked separately at every state: left[s] <= right[s].
#[derive(Debug, Clone, PartialEq)]
pub struct PerStateReport {
    pub name: &'static str,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// min_s (right[s] - left[s]).
    pub worst_slack: f64,
    pub pass: bool,
}

impl PerStateReport {
    pub(crate) fn new(name: &'static str, left: Vec<f64>, right: Vec<f64>) -> Self {
        assert_eq!(left.len(), right.len(), "per-state sides must align");
        assert!(!left.is_empty(), "per-state report needs at least one state");
        let worst_slack = left
            .iter()
            .zip(&right)
            .map(|(l, r)| r - l)
            .fold(f64::INFINITY, f64::min);
        Self {
            name,
            left,
            right,
            worst_slack,
            pass: worst_slack >= -SLACK_FLOOR,
        }
    }
}
