use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::solver::{fit_slope, Termination};

use super::config::{is_numeric_axis, ConfigError, ExperimentConfig};
use super::runner::{format_number, run_experiment};
use super::EXIT_PASS;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub final_f_gap: Option<f64>,
    pub iterations: Option<usize>,
    /// The run ended inside its stopping neighborhood.
    pub reached: Option<bool>,
    /// Least-squares slope of `log f_gap` against `k`.
    pub fitted_rate: Option<f64>,
    pub t_used: Option<f64>,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// `trace.csv` -> `trace_3.csv`.
fn suffixed(path: &Path, index: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{index}"),
    };
    path.with_file_name(name)
}

/// One run per value of `axis`; rows follow the order of `values`. Failing
/// runs are recorded in their row and do not stop the sweep.
pub fn sweep(
    template: &ExperimentConfig,
    axis: &str,
    values: &[f64],
) -> Result<Vec<SweepRow>, ConfigError> {
    if !is_numeric_axis(axis) {
        return Err(ConfigError::Schema(vec![format!(
            "`{axis}` is not a numeric configuration key"
        )]));
    }
    Ok(values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| run_one(template, axis, i, value))
        .collect())
}

fn run_one(template: &ExperimentConfig, axis: &str, index: usize, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        final_f_gap: None,
        iterations: None,
        reached: None,
        fitted_rate: None,
        t_used: None,
        exit_code: EXIT_PASS,
        error: None,
    };
    let mut cfg = match template.with_value(axis, value) {
        Ok(c) => c,
        Err(e) => {
            row.exit_code = super::EXIT_CONFIG;
            row.error = Some(e.to_string());
            return row;
        }
    };
    cfg.outputs.csv = cfg.outputs.csv.as_deref().map(|p| suffixed(p, index));
    cfg.outputs.report = cfg.outputs.report.as_deref().map(|p| suffixed(p, index));
    match run_experiment(&cfg) {
        Ok(out) => {
            row.exit_code = out.exit_code();
            if let Some(trace) = &out.trace {
                let last = trace.last();
                row.final_f_gap = Some(last.f_gap);
                row.iterations = Some(trace.iterations());
                row.reached = Some(trace.terminated == Termination::NeighborhoodReached);
                row.t_used = Some(trace.t_used.unwrap_or(trace.config.t));
                let pts: Vec<(f64, f64)> = trace
                    .records
                    .iter()
                    .filter(|r| r.f_gap > 0.0)
                    .map(|r| (r.k as f64, r.f_gap.ln()))
                    .collect();
                row.fitted_rate = fit_slope(&pts).ok();
            }
            let failed: Vec<&str> = out
                .report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            if !failed.is_empty() {
                row.error = Some(format!("failed checks: {}", failed.join(" ")));
            }
        }
        Err(e) => {
            row.exit_code = e.exit_code();
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Most severe exit code over the rows; zero for an empty sweep.
pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_PASS)
}

pub fn write_summary_csv(axis: &str, rows: &[SweepRow], w: &mut dyn Write) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        axis,
        "final_f_gap",
        "iterations",
        "reached",
        "fitted_rate",
        "t_used",
        "exit_code",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    for r in rows {
        out.write_record([
            format_number(r.value),
            opt(r.final_f_gap),
            r.iterations.map(|n| n.to_string()).unwrap_or_default(),
            r.reached.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.fitted_rate),
            opt(r.t_used),
            r.exit_code.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()
}
