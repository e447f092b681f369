//! Plain-text serialization of datasets.
//!
//! A single header record carries the metadata and the field layout:
//!
//! ```text
//! offline-dataset v1 env=grid behavior=eps-soft-0.30 seed=7 \
//!     gamma=9.0000000000000002e-1 created=0 state=index:1 action=index:1 \
//!     episodes=100 transitions=6000
//! ```
//!
//! (written as one line; wrapped here for readability). Every following
//! line is one transition:
//!
//! ```text
//! <episode> <t> <state> <action> <reward> <next_state> <done> <timeout>
//! ```
//!
//! where state, action, and next_state each occupy the token width declared
//! in the header. Floats are written with 17 significant digits so a
//! load-save cycle is byte-identical. Blank lines and lines starting with
//! `#` are ignored on load.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{DatasetMeta, FieldCodec, OfflineDataset, Transition};
use crate::error::DataError;

const MAGIC: &str = "offline-dataset";
const VERSION: &str = "v1";
const HEADER_KEYS: [&str; 9] = [
    "env",
    "behavior",
    "seed",
    "gamma",
    "created",
    "state",
    "action",
    "episodes",
    "transitions",
];

/// Renders `ds` in the text format.
pub fn dataset_to_string<S: FieldCodec, A: FieldCodec>(ds: &OfflineDataset<S, A>) -> String {
    let m = ds.meta();
    let mut out = String::new();
    let _ = write!(
        out,
        "{MAGIC} {VERSION} env={} behavior={} seed={} gamma={:.16e} created={}",
        m.env, m.behavior, m.seed, m.gamma, m.created
    );
    let _ = write!(
        out,
        " state={}:{} action={}:{} episodes={} transitions={}\n",
        S::KIND,
        ds.state_width(),
        A::KIND,
        ds.action_width(),
        ds.n_episodes(),
        ds.len()
    );
    for tr in ds.transitions() {
        let _ = write!(out, "{} {}", tr.episode_id, tr.t);
        tr.state.push_tokens(&mut out);
        tr.action.push_tokens(&mut out);
        let _ = write!(out, " {:.16e}", tr.reward);
        tr.next_state.push_tokens(&mut out);
        out.push_str(if tr.done { " 1" } else { " 0" });
        out.push_str(if tr.timeout { " 1\n" } else { " 0\n" });
    }
    out
}

pub fn save_dataset<S: FieldCodec, A: FieldCodec>(
    ds: &OfflineDataset<S, A>,
    path: &Path,
) -> Result<(), DataError> {
    std::fs::write(path, dataset_to_string(ds))?;
    Ok(())
}

pub fn load_dataset<S: FieldCodec, A: FieldCodec>(
    path: &Path,
) -> Result<OfflineDataset<S, A>, DataError> {
    dataset_from_str(&std::fs::read_to_string(path)?)
}

pub fn dataset_from_str<S: FieldCodec, A: FieldCodec>(
    text: &str,
) -> Result<OfflineDataset<S, A>, DataError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected header"))?;
    let (meta, state_width, action_width, n_episodes, n_transitions) =
        parse_header::<S, A>(header_line, header)?;
    if n_transitions == 0 || n_episodes == 0 {
        return Err(DataError::Empty);
    }

    let expected_tokens = 2 + 2 * state_width + action_width + 3;
    let mut transitions = Vec::with_capacity(n_transitions);
    let mut line_of = Vec::with_capacity(n_transitions);
    let mut last_line = header_line;
    for i in 0..n_transitions {
        let (line, l) = lines.next().ok_or_else(|| {
            parse_err(
                last_line + 1,
                &format!("file ended at transition {i} of {n_transitions}"),
            )
        })?;
        last_line = line;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != expected_tokens {
            return Err(parse_err(
                line,
                &format!(
                    "expected {expected_tokens} fields for transition {i}, found {}",
                    tokens.len()
                ),
            ));
        }
        let episode_id = tokens[0]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad episode id {:?}", tokens[0])))?;
        let t = tokens[1]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad timestep {:?}", tokens[1])))?;
        let mut at = 2;
        let state = S::from_tokens(&tokens[at..at + state_width])
            .ok_or_else(|| parse_err(line, "bad state field"))?;
        at += state_width;
        let action = A::from_tokens(&tokens[at..at + action_width])
            .ok_or_else(|| parse_err(line, "bad action field"))?;
        at += action_width;
        let reward: f64 = tokens[at]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad reward {:?}", tokens[at])))?;
        at += 1;
        let next_state = S::from_tokens(&tokens[at..at + state_width])
            .ok_or_else(|| parse_err(line, "bad next_state field"))?;
        at += state_width;
        let done = parse_flag(line, "done", tokens[at])?;
        let timeout = parse_flag(line, "timeout", tokens[at + 1])?;
        transitions.push(Transition {
            state,
            action,
            reward,
            next_state,
            done,
            timeout,
            episode_id,
            t,
        });
        line_of.push(line);
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, "trailing content after the last transition"));
    }

    let ds = OfflineDataset::new(meta, transitions).map_err(|e| match e {
        DataError::Malformed { index, msg } => parse_err(line_of[index], &msg),
        other => other,
    })?;
    if ds.n_episodes() != n_episodes {
        return Err(parse_err(
            header_line,
            &format!(
                "header declares {n_episodes} episodes, file contains {}",
                ds.n_episodes()
            ),
        ));
    }
    Ok(ds)
}

fn parse_header<S: FieldCodec, A: FieldCodec>(
    line: usize,
    header: &str,
) -> Result<(DatasetMeta, usize, usize, usize, usize), DataError> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(parse_err(line, &format!("expected `{MAGIC}` header")));
    }
    match parts.next() {
        Some(VERSION) => {}
        Some(v) => {
            return Err(DataError::Version {
                found: v.to_string(),
            })
        }
        None => return Err(parse_err(line, "header is missing the format version")),
    }

    let mut values = Vec::with_capacity(HEADER_KEYS.len());
    for key in HEADER_KEYS {
        let part = parts
            .next()
            .ok_or_else(|| parse_err(line, &format!("header is missing `{key}=`")))?;
        let (found, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line, &format!("malformed header entry {part:?}")))?;
        if found != key {
            return Err(parse_err(
                line,
                &format!("expected header key `{key}`, found `{found}`"),
            ));
        }
        values.push(value);
    }
    if let Some(extra) = parts.next() {
        return Err(parse_err(
            line,
            &format!("unexpected header entry {extra:?}"),
        ));
    }

    let meta = DatasetMeta {
        env: values[0].to_string(),
        behavior: values[1].to_string(),
        seed: values[2]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad seed {:?}", values[2])))?,
        gamma: values[3]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad gamma {:?}", values[3])))?,
        created: values[4]
            .parse()
            .map_err(|_| parse_err(line, &format!("bad created {:?}", values[4])))?,
    };
    let state_width = parse_layout(line, "state", S::KIND, values[5])?;
    let action_width = parse_layout(line, "action", A::KIND, values[6])?;
    let n_episodes = values[7]
        .parse()
        .map_err(|_| parse_err(line, &format!("bad episode count {:?}", values[7])))?;
    let n_transitions = values[8]
        .parse()
        .map_err(|_| parse_err(line, &format!("bad transition count {:?}", values[8])))?;
    Ok((meta, state_width, action_width, n_episodes, n_transitions))
}

fn parse_layout(
    line: usize,
    field: &str,
    expected_kind: &str,
    value: &str,
) -> Result<usize, DataError> {
    let (kind, width) = value
        .split_once(':')
        .ok_or_else(|| parse_err(line, &format!("malformed {field} layout {value:?}")))?;
    if kind != expected_kind {
        return Err(parse_err(
            line,
            &format!("dataset stores {kind} {field}s, this loader expects {expected_kind}"),
        ));
    }
    let width: usize = width
        .parse()
        .map_err(|_| parse_err(line, &format!("bad {field} width {width:?}")))?;
    if width == 0 {
        return Err(parse_err(line, &format!("{field} width must be positive")));
    }
    Ok(width)
}

fn parse_flag(line: usize, name: &str, token: &str) -> Result<bool, DataError> {
    match token {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_err(
            line,
            &format!("{name} flag must be 0 or 1, found {other:?}"),
        )),
    }
}

fn parse_err(line: usize, msg: &str) -> DataError {
    DataError::Parse {
        line,
        msg: msg.to_string(),
    }
}
