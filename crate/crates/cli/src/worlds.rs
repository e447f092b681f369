//! Benchmark worlds the binary knows how to build.
//!
//! Two tabular tasks with exactly solvable returns (a slippery grid and a
//! one-state bandit) plus the continuous point-reach environment. Each world
//! is keyed by `world_seed`, which fixes the goal cell, the slip rate, or
//! the arm payoffs, so the same config always names the same task.

use mdp_core::{epsilon_soft, stream, substream, PointReach, TabularMdp, TabularPolicy};
use rand::Rng;

use crate::config::RunConfig;
use crate::error::CliError;

pub const GRID_SIDE: usize = 4;
pub const BANDIT_ARMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldKind {
    TabularGrid,
    TabularBandit,
    PointReach,
}

impl WorldKind {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "tabular-grid" => Ok(Self::TabularGrid),
            "tabular-bandit" => Ok(Self::TabularBandit),
            "point-reach" => Ok(Self::PointReach),
            other => Err(CliError::Usage(format!(
                "unknown world `{other}`; expected tabular-grid, tabular-bandit, or point-reach"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TabularGrid => "tabular-grid",
            Self::TabularBandit => "tabular-bandit",
            Self::PointReach => "point-reach",
        }
    }

    pub fn is_tabular(self) -> bool {
        !matches!(self, Self::PointReach)
    }
}

/// A tabular task plus the logging policy that generated its datasets.
pub struct TabularSetup {
    pub mdp: TabularMdp,
    pub behavior: TabularPolicy,
    pub behavior_desc: String,
}

fn check_common(cfg: &RunConfig) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&cfg.gamma) {
        return Err(CliError::Usage(format!(
            "gamma must lie in [0, 1), got {}",
            cfg.gamma
        )));
    }
    if cfg.horizon == 0 {
        return Err(CliError::Usage("horizon must be positive".to_string()));
    }
    if !(0.0..=1.0).contains(&cfg.behavior_eps) {
        return Err(CliError::Usage(format!(
            "behavior_eps must lie in [0, 1], got {}",
            cfg.behavior_eps
        )));
    }
    Ok(())
}

/// 4x4 grid with slippery moves. Actions are up, down, left, right; the
/// intended move executes with probability 1 - slip and each of the other
/// three directions fires with slip / 3, clamped at the walls. Reward for
/// (s, a) is the probability of landing on the goal cell, so returns stay
/// in (0, 1/(1 - gamma)) and the optimal policy hovers next to the goal.
pub fn grid_setup(cfg: &RunConfig) -> Result<TabularSetup, CliError> {
    check_common(cfg)?;
    let n = GRID_SIDE * GRID_SIDE;
    let mut rng = substream(cfg.world_seed, stream::ENV);
    let goal = rng.random_range(0..n);
    let slip: f64 = rng.random_range(0.05..0.25);

    let moved = |cell: usize, dir: usize| -> usize {
        let (r, c) = (cell / GRID_SIDE, cell % GRID_SIDE);
        let (r2, c2) = match dir {
            0 => (r.saturating_sub(1), c),
            1 => ((r + 1).min(GRID_SIDE - 1), c),
            2 => (r, c.saturating_sub(1)),
            _ => (r, (c + 1).min(GRID_SIDE - 1)),
        };
        r2 * GRID_SIDE + c2
    };

    let mut transition = vec![0.0; n * 4 * n];
    let mut reward = vec![0.0; n * 4];
    for s in 0..n {
        for a in 0..4 {
            let row = &mut transition[(s * 4 + a) * n..(s * 4 + a + 1) * n];
            for dir in 0..4 {
                let p = if dir == a { 1.0 - slip } else { slip / 3.0 };
                row[moved(s, dir)] += p;
            }
            reward[s * 4 + a] = row[goal];
        }
    }
    // Uniform start over 16 cells is exact in binary.
    let initial = vec![1.0 / n as f64; n];
    let mdp = TabularMdp::new(n, 4, reward, transition, initial, cfg.gamma, cfg.horizon)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    // Greedy-toward-goal base policy: close the row gap first, then the
    // column gap, and push up once standing on the goal.
    let (gr, gc) = (goal / GRID_SIDE, goal % GRID_SIDE);
    let greedy = TabularPolicy::from_weights(n, 4, |s, a| {
        let (r, c) = (s / GRID_SIDE, s % GRID_SIDE);
        let pick = if gr < r {
            0
        } else if gr > r {
            1
        } else if gc < c {
            2
        } else if gc > c {
            3
        } else {
            0
        };
        if a == pick {
            1.0
        } else {
            0.0
        }
    })
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let behavior = epsilon_soft(&greedy, cfg.behavior_eps);
    Ok(TabularSetup {
        mdp,
        behavior,
        behavior_desc: format!("greedy-eps-{:.2}", cfg.behavior_eps),
    })
}

/// One-state bandit with random arm payoffs. The logging policy softens a
/// pull of the best arm, so cloning it is decent and sharpening it is
/// strictly better.
pub fn bandit_setup(cfg: &RunConfig) -> Result<TabularSetup, CliError> {
    check_common(cfg)?;
    let mut rng = substream(cfg.world_seed, stream::ENV);
    let reward: Vec<f64> = (0..BANDIT_ARMS).map(|_| rng.random_range(0.1..1.0)).collect();
    let best = reward
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let transition = vec![1.0; BANDIT_ARMS];
    let mdp = TabularMdp::new(
        1,
        BANDIT_ARMS,
        reward,
        transition,
        vec![1.0],
        cfg.gamma,
        cfg.horizon,
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let greedy = TabularPolicy::from_weights(1, BANDIT_ARMS, |_, a| {
        if a == best {
            1.0
        } else {
            0.0
        }
    })
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let behavior = epsilon_soft(&greedy, cfg.behavior_eps);
    Ok(TabularSetup {
        mdp,
        behavior,
        behavior_desc: format!("greedy-eps-{:.2}", cfg.behavior_eps),
    })
}

pub fn tabular_setup(kind: WorldKind, cfg: &RunConfig) -> Result<TabularSetup, CliError> {
    match kind {
        WorldKind::TabularGrid => grid_setup(cfg),
        WorldKind::TabularBandit => bandit_setup(cfg),
        WorldKind::PointReach => Err(CliError::Usage(
            "point-reach is not a tabular world".to_string(),
        )),
    }
}

pub fn point_reach_env(cfg: &RunConfig) -> Result<PointReach, CliError> {
    check_common(cfg)?;
    Ok(PointReach::new(cfg.world_seed, cfg.horizon))
}
