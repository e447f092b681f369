//! The dataset container and the invariants it enforces.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;

/// How closely a transition's `next_state` must match the following
/// transition's `state` inside an episode.
pub const CHAIN_TOL: f64 = 1e-12;

/// State and action payloads, serialized as whitespace-separated tokens.
/// Tabular worlds store indices; continuous worlds store float vectors.
pub trait FieldCodec: Clone + PartialEq + std::fmt::Debug {
    /// Tag recorded in the dataset header and checked on load.
    const KIND: &'static str;
    /// Token count for one value; constant across a dataset.
    fn width(&self) -> usize;
    fn push_tokens(&self, out: &mut String);
    fn from_tokens(tokens: &[&str]) -> Option<Self>;
    /// Componentwise agreement, for the episode-chaining check.
    fn within(&self, other: &Self, tol: f64) -> bool;
}

impl FieldCodec for usize {
    const KIND: &'static str = "index";

    fn width(&self) -> usize {
        1
    }

    fn push_tokens(&self, out: &mut String) {
        write!(out, " {self}").unwrap();
    }

    fn from_tokens(tokens: &[&str]) -> Option<Self> {
        match tokens {
            [tok] => tok.parse().ok(),
            _ => None,
        }
    }

    fn within(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl FieldCodec for Vec<f64> {
    const KIND: &'static str = "vec";

    fn width(&self) -> usize {
        self.len()
    }

    fn push_tokens(&self, out: &mut String) {
        for x in self {
            write!(out, " {x:.16e}").unwrap();
        }
    }

    fn from_tokens(tokens: &[&str]) -> Option<Self> {
        if tokens.is_empty() {
            return None;
        }
        tokens
            .iter()
            .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect()
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// One logged step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S, A> {
    pub state: S,
    pub action: A,
    pub reward: f64,
    pub next_state: S,
    /// The environment ended the episode on this step.
    pub done: bool,
    /// The horizon cut the episode off on this step. Value targets may
    /// still bootstrap past a timeout, unlike past `done`.
    pub timeout: bool,
    pub episode_id: usize,
    pub t: usize,
}

/// Provenance recorded alongside the transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    /// Environment identifier, such as "grid" or "point-reach".
    pub env: String,
    /// Behavior-policy descriptor, such as "eps-soft-0.30".
    pub behavior: String,
    /// Seed the logging run used.
    pub seed: u64,
    /// Discount intended for return labels downstream.
    pub gamma: f64,
    /// Creation timestamp: SOURCE_DATE_EPOCH when set, otherwise 0 so a
    /// regenerated file stays byte-identical.
    pub created: u64,
}

/// An immutable set of logged episodes. Construction validates every
/// container invariant, so downstream code can index freely.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineDataset<S, A> {
    meta: DatasetMeta,
    transitions: Vec<Transition<S, A>>,
    /// Start offset of each episode, plus a final sentinel at `len`.
    episode_starts: Vec<usize>,
}

impl<S: FieldCodec, A: FieldCodec> OfflineDataset<S, A> {
    pub fn new(
        meta: DatasetMeta,
        transitions: Vec<Transition<S, A>>,
    ) -> Result<Self, DataError> {
        if transitions.is_empty() {
            return Err(DataError::Empty);
        }
        if meta.env.is_empty() || meta.env.split_whitespace().count() != 1 {
            return Err(DataError::Invalid(format!(
                "env identifier {:?} must be one whitespace-free token",
                meta.env
            )));
        }
        if meta.behavior.is_empty() || meta.behavior.split_whitespace().count() != 1 {
            return Err(DataError::Invalid(format!(
                "behavior descriptor {:?} must be one whitespace-free token",
                meta.behavior
            )));
        }
        if !(0.0..1.0).contains(&meta.gamma) {
            return Err(DataError::Invalid(format!(
                "gamma {} outside [0, 1)",
                meta.gamma
            )));
        }

        let state_width = transitions[0].state.width();
        let action_width = transitions[0].action.width();
        let mut episode_starts = vec![0];
        for (i, tr) in transitions.iter().enumerate() {
            let fail = |msg: String| DataError::Malformed { index: i, msg };
            if tr.state.width() != state_width || tr.next_state.width() != state_width {
                return Err(fail(format!("state width differs from {state_width}")));
            }
            if tr.action.width() != action_width {
                return Err(fail(format!("action width differs from {action_width}")));
            }
            if !tr.reward.is_finite() {
                return Err(fail("non-finite reward".into()));
            }
            if tr.done && tr.timeout {
                return Err(fail("done and timeout are mutually exclusive".into()));
            }

            let last_of_episode = match transitions.get(i + 1) {
                Some(next) if next.episode_id == tr.episode_id => {
                    if next.t <= tr.t {
                        return Err(fail(format!(
                            "timestep must increase within an episode, got {} then {}",
                            tr.t, next.t
                        )));
                    }
                    if !next.state.within(&tr.next_state, CHAIN_TOL) {
                        return Err(fail(
                            "next_state does not chain to the following state".into(),
                        ));
                    }
                    false
                }
                Some(next) => {
                    if next.episode_id != tr.episode_id + 1 {
                        return Err(fail(format!(
                            "episode ids must increase by one, got {} then {}",
                            tr.episode_id, next.episode_id
                        )));
                    }
                    episode_starts.push(i + 1);
                    true
                }
                None => true,
            };
            if last_of_episode {
                if !tr.done && !tr.timeout {
                    return Err(fail(
                        "an episode's last transition must be done or timeout".into(),
                    ));
                }
            } else if tr.done || tr.timeout {
                return Err(fail(
                    "done and timeout may only mark an episode's last transition".into(),
                ));
            }
        }
        if transitions[0].episode_id != 0 {
            return Err(DataError::Malformed {
                index: 0,
                msg: format!(
                    "episode ids must start at zero, got {}",
                    transitions[0].episode_id
                ),
            });
        }
        episode_starts.push(transitions.len());
        Ok(Self {
            meta,
            transitions,
            episode_starts,
        })
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_episodes(&self) -> usize {
        self.episode_starts.len() - 1
    }

    pub fn transitions(&self) -> &[Transition<S, A>] {
        &self.transitions
    }

    pub fn episode(&self, e: usize) -> &[Transition<S, A>] {
        let (start, end) = self.episode_range(e);
        &self.transitions[start..end]
    }

    /// Half-open range of episode `e` in `transitions`.
    pub fn episode_range(&self, e: usize) -> (usize, usize) {
        (self.episode_starts[e], self.episode_starts[e + 1])
    }

    pub fn state_width(&self) -> usize {
        self.transitions[0].state.width()
    }

    pub fn action_width(&self) -> usize {
        self.transitions[0].action.width()
    }

    /// Uniform-with-replacement minibatch of transition indices.
    pub fn sample_indices(
        &self,
        size: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>, DataError> {
        if size == 0 {
            return Err(DataError::Invalid("minibatch size must be positive".into()));
        }
        if size > self.len() {
            return Err(DataError::Invalid(format!(
                "minibatch size {size} exceeds dataset size {}",
                self.len()
            )));
        }
        Ok((0..size)
            .map(|_| rng.random_range(0..self.len()))
            .collect())
    }
}
