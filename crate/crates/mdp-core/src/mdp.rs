//! Tabular MDPs with exact evaluation.
//!
//! All solvers go through LU factorizations of (I - gamma * P_pi) or its
//! transpose. For a row-stochastic P and gamma < 1 that matrix is strictly
//! diagonally dominant after scaling, hence nonsingular, so a failed solve is
//! treated as an internal error. Residuals are checked after every solve and
//! iteratively refined rather than trusted blindly, because the bound
//! certifications downstream run at 1e-9 tolerances and inherit any slop
//! introduced here.

use nalgebra::{DMatrix, DVector};

use crate::error::MdpError;

const ROW_SUM_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const REFINE_ROUNDS: usize = 4;

/// A finite MDP: `n_states` states, `n_actions` actions, dense reward and
/// transition tables, an initial state distribution, and a discount factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    /// Reward table, indexed `s * n_actions + a`.
    reward: Vec<f64>,
    /// Transition probabilities, indexed `(s * n_actions + a) * n_states + s2`.
    transition: Vec<f64>,
    /// Initial state distribution.
    initial_dist: Vec<f64>,
    gamma: f64,
    /// Episode length used when rolling out or generating data. Exact
    /// evaluation is infinite-horizon and ignores it.
    horizon: usize,
}

/// A stochastic policy over a tabular MDP, stored as one probability row per
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

/// Both exact expressions for J(pi_new) - J(pi_old). The two are equal in
/// exact arithmetic; keeping them separate lets callers check that they agree
/// instead of assuming it.
#[derive(Debug, Clone, Copy)]
pub struct PerformanceDifference {
    /// J(pi_new) - J(pi_old) computed from two independent value solves.
    pub direct: f64,
    /// sum_s rho_{pi_new}(s) * sum_a pi_new(a|s) * A_{pi_old}(s, a).
    pub advantage_form: f64,
}

impl TabularMdp {
    /// Validates and builds an MDP. Transition rows must each sum to one
    /// within 1e-12 with nonnegative entries, the initial distribution
    /// likewise, and gamma must lie in [0, 1).
    pub fn new(
        n_states: usize,
        n_actions: usize,
        reward: Vec<f64>,
        transition: Vec<f64>,
        initial_dist: Vec<f64>,
        gamma: f64,
        horizon: usize,
    ) -> Result<Self, MdpError> {
        if n_states == 0 || n_actions == 0 {
            return Err(MdpError::Invalid(
                "state and action counts must be positive".into(),
            ));
        }
        if reward.len() != n_states * n_actions {
            return Err(MdpError::Invalid(format!(
                "reward table has {} entries, expected {}",
                reward.len(),
                n_states * n_actions
            )));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(MdpError::Invalid(format!(
                "transition table has {} entries, expected {}",
                transition.len(),
                n_states * n_actions * n_states
            )));
        }
        if initial_dist.len() != n_states {
            return Err(MdpError::Invalid(format!(
                "initial distribution has {} entries, expected {}",
                initial_dist.len(),
                n_states
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(MdpError::Invalid(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        if horizon == 0 {
            return Err(MdpError::Invalid("horizon must be positive".into()));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(MdpError::Invalid("reward table has non-finite entries".into()));
        }
        for (idx, row) in transition.chunks(n_states).enumerate() {
            check_distribution(row, ROW_SUM_TOL).map_err(|msg| {
                let s = idx / n_actions;
                let a = idx % n_actions;
                MdpError::Invalid(format!("transition row (s={s}, a={a}): {msg}"))
            })?;
        }
        check_distribution(&initial_dist, ROW_SUM_TOL)
            .map_err(|msg| MdpError::Invalid(format!("initial distribution: {msg}")))?;
        Ok(Self {
            n_states,
            n_actions,
            reward,
            transition,
            initial_dist,
            gamma,
            horizon,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// Largest absolute reward in the table.
    pub fn max_abs_reward(&self) -> f64 {
        self.reward.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Probability of moving to `s2` after taking `a` in `s`.
    pub fn transition(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s2]
    }

    /// The successor distribution row for (s, a).
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// Returns a copy with every reward scaled by `c`. Useful for checking
    /// how derived quantities respond to reward scaling.
    pub fn scale_rewards(&self, c: f64) -> Self {
        let mut out = self.clone();
        for r in &mut out.reward {
            *r *= c;
        }
        out
    }

    /// State-to-state transition matrix under `pi`:
    /// P_pi[s, s2] = sum_a pi(a|s) p(s2|s, a).
    pub fn transition_matrix_under(&self, pi: &TabularPolicy) -> DMatrix<f64> {
        self.check_policy(pi);
        let n = self.n_states;
        DMatrix::from_fn(n, n, |s, s2| {
            (0..self.n_actions)
                .map(|a| pi.prob(s, a) * self.transition(s, a, s2))
                .sum()
        })
    }

    /// Expected one-step reward under `pi` at each state.
    pub fn reward_under(&self, pi: &TabularPolicy) -> DVector<f64> {
        self.check_policy(pi);
        DVector::from_fn(self.n_states, |s, _| {
            (0..self.n_actions)
                .map(|a| pi.prob(s, a) * self.reward(s, a))
                .sum()
        })
    }

    /// Exact V_pi from the linear system (I - gamma P_pi) V = r_pi.
    pub fn exact_state_values(&self, pi: &TabularPolicy) -> Result<Vec<f64>, MdpError> {
        let p = self.transition_matrix_under(pi);
        let r = self.reward_under(pi);
        let a = DMatrix::identity(self.n_states, self.n_states) - self.gamma * &p;
        let v = solve_refined(&a, &r, "state values")?;
        Ok(v.as_slice().to_vec())
    }

    /// Exact Q_pi(s, a) = r(s, a) + gamma sum_{s2} p(s2|s, a) V_pi(s2),
    /// indexed `s * n_actions + a`.
    pub fn exact_action_values(&self, pi: &TabularPolicy) -> Result<Vec<f64>, MdpError> {
        let v = self.exact_state_values(pi)?;
        Ok(self.action_values_from_state_values(&v))
    }

    /// Q derived from an externally supplied V table (no solve).
    pub fn action_values_from_state_values(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_states, "value table has wrong length");
        let mut q = vec![0.0; self.n_states * self.n_actions];
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.transition_row(s, a);
                let next: f64 = row.iter().zip(v).map(|(p, v)| p * v).sum();
                q[s * self.n_actions + a] = self.reward(s, a) + self.gamma * next;
            }
        }
        q
    }

    /// Exact advantage A_pi(s, a) = Q_pi(s, a) - V_pi(s), indexed
    /// `s * n_actions + a`.
    pub fn exact_advantage(&self, pi: &TabularPolicy) -> Result<Vec<f64>, MdpError> {
        let v = self.exact_state_values(pi)?;
        let q = self.action_values_from_state_values(&v);
        let mut adv = q;
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                adv[s * self.n_actions + a] -= v[s];
            }
        }
        Ok(adv)
    }

    /// Unnormalized discounted state visitation frequencies:
    /// rho = d0 + gamma P_pi^T rho, so the entries sum to 1 / (1 - gamma).
    pub fn visitation_frequencies(&self, pi: &TabularPolicy) -> Result<Vec<f64>, MdpError> {
        let p = self.transition_matrix_under(pi);
        let d0 = DVector::from_column_slice(&self.initial_dist);
        let a = DMatrix::identity(self.n_states, self.n_states) - self.gamma * p.transpose();
        let rho = solve_refined(&a, &d0, "visitation frequencies")?;
        Ok(rho.as_slice().to_vec())
    }

    /// Exact discounted return J(pi) = sum_s d0(s) V_pi(s).
    pub fn exact_return(&self, pi: &TabularPolicy) -> Result<f64, MdpError> {
        let v = self.exact_state_values(pi)?;
        Ok(self
            .initial_dist
            .iter()
            .zip(&v)
            .map(|(d, v)| d * v)
            .sum())
    }

    /// J(pi_new) - J(pi_old) computed two independent ways: directly from two
    /// value solves, and as the visitation-weighted expected advantage of
    /// pi_old under pi_new.
    pub fn performance_difference(
        &self,
        pi_new: &TabularPolicy,
        pi_old: &TabularPolicy,
    ) -> Result<PerformanceDifference, MdpError> {
        let direct = self.exact_return(pi_new)? - self.exact_return(pi_old)?;
        let rho_new = self.visitation_frequencies(pi_new)?;
        let adv_old = self.exact_advantage(pi_old)?;
        let mut advantage_form = 0.0;
        for s in 0..self.n_states {
            let mut inner = 0.0;
            for a in 0..self.n_actions {
                inner += pi_new.prob(s, a) * adv_old[s * self.n_actions + a];
            }
            advantage_form += rho_new[s] * inner;
        }
        Ok(PerformanceDifference {
            direct,
            advantage_form,
        })
    }

    fn check_policy(&self, pi: &TabularPolicy) {
        assert_eq!(
            (pi.n_states, pi.n_actions),
            (self.n_states, self.n_actions),
            "policy shape ({}, {}) does not match mdp shape ({}, {})",
            pi.n_states,
            pi.n_actions,
            self.n_states,
            self.n_actions
        );
    }
}

impl TabularPolicy {
    /// Validates and builds a policy from per-state probability rows stored
    /// as one flat vector indexed `s * n_actions + a`.
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self, MdpError> {
        if probs.len() != n_states * n_actions {
            return Err(MdpError::Invalid(format!(
                "policy table has {} entries, expected {}",
                probs.len(),
                n_states * n_actions
            )));
        }
        for (s, row) in probs.chunks(n_actions).enumerate() {
            check_distribution(row, ROW_SUM_TOL)
                .map_err(|msg| MdpError::Invalid(format!("policy row for state {s}: {msg}")))?;
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    /// The uniform policy.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        Self {
            n_states,
            n_actions,
            probs: vec![p; n_states * n_actions],
        }
    }

    /// Builds a policy row by row from a closure returning unnormalized
    /// nonnegative weights; each row is normalized to sum to one.
    pub fn from_weights<F>(n_states: usize, n_actions: usize, mut f: F) -> Result<Self, MdpError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut probs = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            let row = &mut probs[s * n_actions..(s + 1) * n_actions];
            for (a, slot) in row.iter_mut().enumerate() {
                let w = f(s, a);
                if !w.is_finite() || w < 0.0 {
                    return Err(MdpError::Invalid(format!(
                        "weight for (s={s}, a={a}) must be finite and nonnegative, got {w}"
                    )));
                }
                *slot = w;
            }
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(MdpError::Invalid(format!(
                    "weights for state {s} sum to {total}, cannot normalize"
                )));
            }
            for slot in row.iter_mut() {
                *slot /= total;
            }
        }
        Self::new(n_states, n_actions, probs)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total-variation distance to `other` at state `s`.
    pub fn tv(&self, other: &TabularPolicy, s: usize) -> f64 {
        crate::tv::tv_discrete(self.row(s), other.row(s))
    }

    /// max_s TV(self || other)[s].
    pub fn max_tv(&self, other: &TabularPolicy) -> f64 {
        (0..self.n_states)
            .map(|s| self.tv(other, s))
            .fold(0.0, f64::max)
    }

    /// Samples an action at `s`.
    pub fn sample<R: rand::Rng>(&self, s: usize, rng: &mut R) -> usize {
        let row = self.row(s);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.n_actions - 1
    }
}

fn check_distribution(row: &[f64], tol: f64) -> Result<(), String> {
    let mut total = 0.0;
    for (i, &p) in row.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(format!("entry {i} is {p}, must be finite and nonnegative"));
        }
        total += p;
    }
    if (total - 1.0).abs() > tol {
        return Err(format!("sums to {total:.17e}, must be 1 within {tol:e}"));
    }
    Ok(())
}

/// LU solve with iterative refinement. Refinement iterates x += A \ (b - Ax)
/// until the residual stops improving, then the final residual is asserted
/// against the documented 1e-10 budget (scaled by the size of b).
fn solve_refined(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    context: &'static str,
) -> Result<DVector<f64>, MdpError> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b).ok_or(MdpError::Singular { context })?;
    for _ in 0..REFINE_ROUNDS {
        let resid = b - a * &x;
        let norm = resid.amax();
        if norm < 1e-15 {
            break;
        }
        let corr = lu.solve(&resid).ok_or(MdpError::Singular { context })?;
        x += corr;
    }
    let resid = (b - a * &x).amax();
    let scale = b.amax().max(1.0);
    if resid > RESIDUAL_TOL * scale {
        return Err(MdpError::Invalid(format!(
            "{context}: residual {resid:e} exceeds budget {:e}",
            RESIDUAL_TOL * scale
        )));
    }
    Ok(x)
}
