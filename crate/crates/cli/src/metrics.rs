//! Append-only metrics table written as tidy CSV.
//!
//! Every diagnostic a run emits lands in one long table: run id, seed, step,
//! metric name, value. No wide rows, no per-stage files. The first line is a
//! versioned schema marker so readers can refuse files they do not
//! understand. Values are printed with full precision because the rerun
//! tests compare these files byte for byte.

use std::path::Path;

use crate::error::CliError;

pub const METRICS_SCHEMA: &str = "# bppo-metrics v1";
pub const METRICS_HEADER: &str = "run,seed,step,metric,value";

#[derive(Debug, Clone)]
pub struct MetricsTable {
    run_id: String,
    seed: u64,
    rows: Vec<(usize, &'static str, f64)>,
}

impl MetricsTable {
    pub fn new(run_id: &str, seed: u64) -> Self {
        Self {
            run_id: run_id.to_string(),
            seed,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, step: usize, metric: &'static str, value: f64) {
        self.rows.push((step, metric, value));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (2 + self.rows.len()));
        out.push_str(METRICS_SCHEMA);
        out.push('\n');
        out.push_str(METRICS_HEADER);
        out.push('\n');
        for (step, metric, value) in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.16e}\n",
                self.run_id, self.seed, step, metric, value
            ));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| CliError::Data(format!("metrics {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub run: String,
    pub seed: u64,
    pub step: usize,
    pub metric: String,
    pub value: f64,
}

/// Parses a metrics file back into rows, validating schema and header.
pub fn parse_metrics(text: &str) -> Result<Vec<MetricRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first == METRICS_SCHEMA => {}
        Some(first) => {
            return Err(CliError::Data(format!(
                "metrics schema mismatch: expected `{METRICS_SCHEMA}`, found `{first}`"
            )))
        }
        None => return Err(CliError::Data("metrics file is empty".to_string())),
    }
    match lines.next() {
        Some(header) if header == METRICS_HEADER => {}
        other => {
            return Err(CliError::Data(format!(
                "metrics header mismatch: found `{}`",
                other.unwrap_or("<eof>")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(5, ',').collect();
        if fields.len() != 5 {
            return Err(CliError::Data(format!(
                "metrics row {}: expected 5 fields, found {}",
                i + 3,
                fields.len()
            )));
        }
        let parse_err =
            |what: &str| CliError::Data(format!("metrics row {}: bad {what} field", i + 3));
        rows.push(MetricRow {
            run: fields[0].to_string(),
            seed: fields[1].parse().map_err(|_| parse_err("seed"))?,
            step: fields[2].parse().map_err(|_| parse_err("step"))?,
            metric: fields[3].to_string(),
            value: fields[4].parse().map_err(|_| parse_err("value"))?,
        });
    }
    Ok(rows)
}

/// Pulls the value of a named summary metric, newest row winning.
pub fn last_value(rows: &[MetricRow], metric: &str) -> Option<f64> {
    rows.iter().rev().find(|r| r.metric == metric).map(|r| r.value)
}
