//! Plain-text serialization of tabular MDPs.
//!
//! The format is line-oriented and human-editable:
//!
//! ```text
//! tabular-mdp v1
//! states 2
//! actions 2
//! gamma 9.0000000000000002e-1
//! horizon 40
//! d0 <S floats>
//! reward <s> <A floats>
//! transition <s> <a> <S floats>
//! ```
//!
//! One `reward` line per state in order, then one `transition` line per
//! (state, action) pair in lexicographic order. Floats are written with 17
//! significant digits so a load-save cycle is byte-identical. Blank lines
//! and lines starting with `#` are ignored on load.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::MdpError;
use crate::mdp::TabularMdp;

const MAGIC: &str = "tabular-mdp";
const VERSION: &str = "v1";

/// Serializes `mdp` to the text format and writes it to `path`.
pub fn save_mdp(mdp: &TabularMdp, path: &Path) -> Result<(), MdpError> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "states {}", mdp.n_states());
    let _ = writeln!(out, "actions {}", mdp.n_actions());
    let _ = writeln!(out, "gamma {:.16e}", mdp.gamma());
    let _ = writeln!(out, "horizon {}", mdp.horizon());
    let _ = writeln!(out, "d0 {}", join_floats(mdp.initial_dist()));
    for s in 0..mdp.n_states() {
        let row: Vec<f64> = (0..mdp.n_actions()).map(|a| mdp.reward(s, a)).collect();
        let _ = writeln!(out, "reward {s} {}", join_floats(&row));
    }
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            let _ = writeln!(out, "transition {s} {a} {}", join_floats(mdp.transition_row(s, a)));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses an MDP from the text format at `path`.
pub fn load_mdp(path: &Path) -> Result<TabularMdp, MdpError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected header"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(parse_err(line, &format!("expected `{MAGIC}` header")));
    }
    match parts.next() {
        Some(VERSION) => {}
        Some(v) => {
            return Err(parse_err(
                line,
                &format!("unsupported format version `{v}`, this build reads {VERSION}"),
            ))
        }
        None => return Err(parse_err(line, "header is missing the format version")),
    }

    let n_states = parse_scalar::<usize>(&mut lines, "states")?;
    let n_actions = parse_scalar::<usize>(&mut lines, "actions")?;
    let gamma = parse_scalar::<f64>(&mut lines, "gamma")?;
    let horizon = parse_scalar::<usize>(&mut lines, "horizon")?;

    let (line, l) = next_line(&mut lines, "d0")?;
    let initial_dist = parse_tagged_floats(line, l, "d0", &[], n_states)?;

    let mut reward = vec![0.0; n_states * n_actions];
    for s in 0..n_states {
        let (line, l) = next_line(&mut lines, "reward")?;
        let row = parse_tagged_floats(line, l, "reward", &[s], n_actions)?;
        reward[s * n_actions..(s + 1) * n_actions].copy_from_slice(&row);
    }

    let mut transition = vec![0.0; n_states * n_actions * n_states];
    for s in 0..n_states {
        for a in 0..n_actions {
            let (line, l) = next_line(&mut lines, "transition")?;
            let row = parse_tagged_floats(line, l, "transition", &[s, a], n_states)?;
            let base = (s * n_actions + a) * n_states;
            transition[base..base + n_states].copy_from_slice(&row);
        }
    }

    if let Some((line, l)) = lines.next() {
        return Err(parse_err(line, &format!("unexpected trailing content `{l}`")));
    }

    TabularMdp::new(n_states, n_actions, reward, transition, initial_dist, gamma, horizon)
        .map_err(|e| MdpError::Parse {
            line: 0,
            msg: format!("file parsed but the tables are invalid: {e}"),
        })
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_err(line: usize, msg: &str) -> MdpError {
    MdpError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn next_line<'a, I>(lines: &mut I, expected: &str) -> Result<(usize, &'a str), MdpError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    lines
        .next()
        .ok_or_else(|| parse_err(0, &format!("file ended early, expected a `{expected}` line")))
}

fn parse_scalar<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<T, MdpError> {
    let (line, l) = next_line(lines, key)?;
    let mut parts = l.split_whitespace();
    if parts.next() != Some(key) {
        return Err(parse_err(line, &format!("expected `{key} <value>`, got `{l}`")));
    }
    let raw = parts
        .next()
        .ok_or_else(|| parse_err(line, &format!("`{key}` line is missing its value")))?;
    if parts.next().is_some() {
        return Err(parse_err(line, &format!("`{key}` line has trailing tokens")));
    }
    raw.parse::<T>()
        .map_err(|_| parse_err(line, &format!("could not parse `{raw}` as {key}")))
}

fn parse_tagged_floats(
    line: usize,
    l: &str,
    key: &str,
    indices: &[usize],
    expect_len: usize,
) -> Result<Vec<f64>, MdpError> {
    let mut parts = l.split_whitespace();
    if parts.next() != Some(key) {
        return Err(parse_err(line, &format!("expected a `{key}` line, got `{l}`")));
    }
    for (pos, want) in indices.iter().enumerate() {
        let raw = parts.next().ok_or_else(|| {
            parse_err(line, &format!("`{key}` line is missing index {pos}"))
        })?;
        let got: usize = raw
            .parse()
            .map_err(|_| parse_err(line, &format!("could not parse index `{raw}`")))?;
        if got != *want {
            return Err(parse_err(
                line,
                &format!("`{key}` lines must appear in order; expected index {want}, got {got}"),
            ));
        }
    }
    let values: Result<Vec<f64>, MdpError> = parts
        .map(|raw| {
            raw.parse::<f64>()
                .map_err(|_| parse_err(line, &format!("could not parse float `{raw}`")))
        })
        .collect();
    let values = values?;
    if values.len() != expect_len {
        return Err(parse_err(
            line,
            &format!("`{key}` line has {} values, expected {expect_len}", values.len()),
        ));
    }
    Ok(values)
}
