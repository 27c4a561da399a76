use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::error::Error;
use crate::solver::{run_with, RunOptions, Trace};

use super::checks::evaluate;
use super::config::{ConfigError, ExperimentConfig};
use super::{
    CheckResult, VerificationReport, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PASS,
};

pub const CSV_HEADER: [&str; 9] = [
    "k", "f_gap", "dist", "step_len", "active", "lambda_k", "t_k", "q_k", "envelope",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("cannot run experiment: {0}")]
    Solver(Error),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Absent when the solver failed numerically.
    pub trace: Option<Trace>,
    pub report: VerificationReport,
    pub numerical_failure: bool,
}

impl ExperimentOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.numerical_failure {
            EXIT_NUMERICAL
        } else if !self.report.passed {
            EXIT_CHECK_FAILED
        } else {
            EXIT_PASS
        }
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    passed: bool,
    terminated: Option<&'static str>,
    iterations: Option<usize>,
    checks: &'a [CheckResult],
}

/// Runs the configured solver, evaluates the configured checks and writes
/// the CSV trace and JSON report when their paths are set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let opts = RunOptions {
        anchor: None,
        grid_seed: Some(cfg.seed),
    };
    let outcome = match run_with(&cfg.problem, &cfg.x0, &cfg.solver, &opts) {
        Ok(trace) => {
            let checks = cfg
                .verification
                .iter()
                .map(|spec| evaluate(spec, &cfg.problem, &trace))
                .collect();
            ExperimentOutcome {
                trace: Some(trace),
                report: VerificationReport::new(checks),
                numerical_failure: false,
            }
        }
        Err(e @ Error::NumericalFailure { .. }) => ExperimentOutcome {
            trace: None,
            report: VerificationReport::new(vec![CheckResult::failed("solver", e.to_string())]),
            numerical_failure: true,
        },
        Err(e) => return Err(ExperimentError::Solver(e)),
    };

    if let (Some(path), Some(trace)) = (&cfg.outputs.csv, &outcome.trace) {
        write_file(path, |w| write_trace_csv(trace, w))?;
    }
    if let Some(path) = &cfg.outputs.report {
        write_file(path, |w| write_report(&outcome, w))?;
    }
    Ok(outcome)
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), ExperimentError> {
    let io_err = |e: io::Error| ExperimentError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Full-precision decimal text (17 significant digits).
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_trace_csv(trace: &Trace, w: &mut dyn Write) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in &trace.records {
        out.write_record([
            r.k.to_string(),
            format_number(r.f_gap),
            format_number(r.dist),
            format_number(r.step_len),
            r.active.to_string(),
            format_number(r.lambda_k),
            format_number(r.t_k),
            format_number(r.q_k),
            format_number(r.envelope),
        ])?;
    }
    out.flush()
}

pub fn write_report(outcome: &ExperimentOutcome, w: &mut dyn Write) -> io::Result<()> {
    let file = ReportFile {
        passed: outcome.report.passed,
        terminated: outcome.trace.as_ref().map(|t| t.terminated.as_str()),
        iterations: outcome.trace.as_ref().map(|t| t.iterations()),
        checks: &outcome.report.checks,
    };
    serde_json::to_writer_pretty(&mut *w, &file)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::parse_config;

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let cfg = parse_config(
            r#"
x0 = [3.0]
[problem]
name = "quartic1d"
[solver]
regime = "ppm"
lambda = 1.0
max_iters = 20
"#,
        )
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        let trace = out.trace.unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), trace.records.len());
        assert_eq!(out.report.checks.len(), 0);
    }
}
