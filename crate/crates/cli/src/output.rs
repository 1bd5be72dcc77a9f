//! CSV trajectory files and JSON summaries. Column sets are fixed per level;
//! floats are written with Rust's shortest round-trip formatting.

use anyhow::{bail, Context, Result};
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::Level;
use vortexsphere::pairs::pairs;
use vortexsphere::timeint::TrajectoryRecord;

/// State column names of the flat chart for a level.
pub fn state_columns(level: Level, n: usize) -> Vec<String> {
    let mut cols = Vec::new();
    match level {
        Level::Sphere => {
            for i in 1..=n {
                for a in 1..=3 {
                    cols.push(format!("x{i}_{a}"));
                }
            }
        }
        Level::Lifted => {
            for i in 1..=n {
                cols.push(format!("re_z_{i}"));
                cols.push(format!("im_z_{i}"));
                cols.push(format!("re_u_{i}"));
                cols.push(format!("im_u_{i}"));
            }
        }
        Level::Liepoisson => {
            for i in 1..=n {
                cols.push(format!("lam_{i}"));
            }
            for (i, j) in pairs(n) {
                cols.push(format!("re_lam_{}_{}", i + 1, j + 1));
                cols.push(format!("im_lam_{}_{}", i + 1, j + 1));
            }
        }
        Level::Shape => {
            for i in 1..n {
                cols.push(format!("s_{i}"));
            }
            for (i, j) in pairs(n - 1) {
                cols.push(format!("re_mu_{}_{}", i + 1, j + 1));
                cols.push(format!("im_mu_{}_{}", i + 1, j + 1));
            }
        }
    }
    cols
}

/// Write `t`, the state columns and the monitor columns.
pub fn write_trajectory_csv(
    path: &Path,
    rec: &TrajectoryRecord,
    state_cols: &[String],
) -> Result<()> {
    let mut text = String::new();
    text.push('t');
    for c in state_cols {
        text.push(',');
        text.push_str(c);
    }
    for m in &rec.monitors {
        text.push(',');
        text.push_str(&m.name);
    }
    text.push('\n');
    for (k, t) in rec.times.iter().enumerate() {
        write!(text, "{t}").unwrap();
        for v in &rec.states[k] {
            write!(text, ",{v}").unwrap();
        }
        for m in &rec.monitors {
            write!(text, ",{}", m.values[k]).unwrap();
        }
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Read a trajectory CSV back: returns times and the state part of each row
/// (matched by column name, so extra invariant columns are ignored).
pub fn read_trajectory_csv(path: &Path, state_cols: &[String]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .context("trajectory file is empty")?
        .split(',')
        .collect();
    if header.first() != Some(&"t") {
        bail!("trajectory file must start with a 't' column");
    }
    let mut indices = Vec::with_capacity(state_cols.len());
    for col in state_cols {
        let idx = header
            .iter()
            .position(|h| h == col)
            .with_context(|| format!("trajectory file lacks column '{col}'"))?;
        indices.push(idx);
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            bail!("line {} has {} fields, expected {}", lineno + 2, fields.len(), header.len());
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .with_context(|| format!("bad float '{s}' on line {}", lineno + 2))
        };
        times.push(parse(fields[0])?);
        let mut row = Vec::with_capacity(indices.len());
        for &idx in &indices {
            row.push(parse(fields[idx])?);
        }
        states.push(row);
    }
    Ok((times, states))
}

/// Final drifts of every monitor plus run statistics.
pub fn run_summary(level: Level, n: usize, rec: &TrajectoryRecord) -> serde_json::Value {
    let invariants: serde_json::Map<String, serde_json::Value> = rec
        .monitors
        .iter()
        .map(|m| {
            let v0 = m.values.first().copied().unwrap_or(f64::NAN);
            let last = m.values.last().copied().unwrap_or(f64::NAN);
            let max_drift = m
                .values
                .iter()
                .map(|v| (v - v0).abs())
                .fold(0.0f64, f64::max);
            (
                m.name.clone(),
                json!({
                    "initial": v0,
                    "final": last,
                    "max_drift": max_drift,
                    "max_rel_drift": if v0.abs() > 0.0 { max_drift / v0.abs() } else { f64::NAN },
                }),
            )
        })
        .collect();
    json!({
        "level": level.name(),
        "n": n,
        "t_end": rec.times.last(),
        "samples": rec.times.len(),
        "steps_accepted": rec.steps_accepted,
        "steps_rejected": rec.steps_rejected,
        "renormalizations": rec.renormalizations,
        "halt": rec.halt.as_ref().map(|h| json!({"t": h.t, "reason": h.error.to_string()})),
        "invariants": invariants,
    })
}
