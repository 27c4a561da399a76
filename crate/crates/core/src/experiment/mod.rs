//! Configuration-driven experiments: run a solver, write its trace, and check
//! the trace against the guarantees that apply to its regime.

pub mod checks;
pub mod config;
pub mod runner;
pub mod sweep;
pub mod verify;

use serde::Serialize;

pub use config::{parse_config, CheckKind, CheckSpec, ConfigError, ExperimentConfig, Outputs};
pub use runner::{run_experiment, write_trace_csv, ExperimentError, ExperimentOutcome};
pub use sweep::{sweep, SweepRow};
pub use verify::{verify_suite, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "TRPPM_SEED";

/// Seed from the environment, if set and parseable.
pub fn seed_override() -> Option<u64> {
    std::env::var(SEED_ENV).ok()?.trim().parse().ok()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    /// Passes when `measured <= bound + tolerance`.
    pub fn at_most(
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        CheckResult {
            name: name.into(),
            passed: measured <= bound + tolerance,
            measured,
            bound,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            bound: f64::NAN,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        VerificationReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: measured {:e}, bound {:e}{}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound,
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", c.detail)
                }
            ));
        }
        out.push_str(if self.passed {
            "overall: PASS\n"
        } else {
            "overall: FAIL\n"
        });
        out
    }
}
