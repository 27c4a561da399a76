//! Trace checks against the guarantees of each regime.

use crate::displacement::phi_raw;
use crate::problem::Problem;
use crate::solver::{empirical_rate, FitBasis, RateQuantity, Regime, Trace};

use super::config::{CheckKind, CheckSpec};
use super::CheckResult;

/// Evaluates one configured check on a trace.
pub fn evaluate(spec: &CheckSpec, problem: &Problem, trace: &Trace) -> CheckResult {
    let tol = spec.tolerance;
    match spec.kind {
        CheckKind::Envelope => envelope(trace, tol),
        CheckKind::ActiveStep => active_step(trace, tol),
        CheckKind::Descent => non_increasing("descent", trace, tol, |r| r.f_gap),
        CheckKind::Fejer => non_increasing("fejer", trace, tol, |r| r.dist),
        CheckKind::StepMonotone => step_monotone(trace, tol),
        CheckKind::Slope => slope(spec, trace),
        CheckKind::Contraction => contraction(problem, trace, tol),
        CheckKind::QDescent => q_descent(trace, tol),
        CheckKind::AdmissibleLambda => admissible_lambda(problem, trace, tol),
    }
}

/// `f_gap <= envelope * (1 + tol)` at every record; measures the worst ratio.
pub fn envelope(trace: &Trace, tol: f64) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut at = 0;
    for r in &trace.records {
        let ratio = if r.envelope > 0.0 {
            r.f_gap / r.envelope
        } else if r.f_gap > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > worst {
            worst = ratio;
            at = r.k;
        }
    }
    CheckResult::at_most(
        "envelope",
        worst,
        1.0,
        tol,
        format!("worst f_gap/envelope at k = {at}"),
    )
}

/// Steps taken from outside the neighborhood of radius `t_k` are tight and
/// have length `t_k`.
pub fn active_step(trace: &Trace, tol: f64) -> CheckResult {
    let n = trace.records.len();
    let mut worst = 0.0_f64;
    let mut inactive = Vec::new();
    for r in &trace.records[..n - 1] {
        if r.dist > r.t_k && r.t_k.is_finite() {
            worst = worst.max((r.step_len - r.t_k).abs());
            if !r.active {
                inactive.push(r.k);
            }
        }
    }
    let mut c = CheckResult::at_most("active_step", worst, 0.0, tol, "max |step_len - t_k|");
    if !inactive.is_empty() {
        c.passed = false;
        let shown: Vec<String> = inactive.iter().take(5).map(|k| k.to_string()).collect();
        c.detail = format!(
            "constraint inactive at {} step(s), first at k = {}",
            inactive.len(),
            shown.join(", ")
        );
    }
    c
}

fn non_increasing(
    name: &str,
    trace: &Trace,
    tol: f64,
    value: impl Fn(&crate::solver::IterateRecord) -> f64,
) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    for w in trace.records.windows(2) {
        let inc = value(&w[1]) - value(&w[0]);
        if inc > worst {
            worst = inc;
            at = w[1].k;
        }
    }
    if trace.records.len() < 2 {
        worst = 0.0;
    }
    CheckResult::at_most(
        name,
        worst,
        0.0,
        tol,
        format!("largest increase at k = {at}"),
    )
}

pub fn step_monotone(trace: &Trace, tol: f64) -> CheckResult {
    let n = trace.records.len();
    let steps = &trace.records[..n.saturating_sub(1)];
    let mut worst = 0.0_f64;
    for w in steps.windows(2) {
        worst = worst.max(w[1].step_len - w[0].step_len);
    }
    CheckResult::at_most(
        "step_monotone",
        worst,
        0.0,
        tol,
        "largest increase of step_len",
    )
}

pub fn slope(spec: &CheckSpec, trace: &Trace) -> CheckResult {
    let last = trace.records.len() - 1;
    let (lo, hi) = spec
        .window
        .unwrap_or((if spec.basis == FitBasis::LogLog { 1 } else { 0 }, last));
    let hi = hi.min(last);
    let (rlo, rhi) = spec.range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let what = match spec.quantity {
        RateQuantity::FGap => "f_gap",
        RateQuantity::Dist => "dist",
    };
    match empirical_rate(trace, (lo, hi), spec.basis, spec.quantity) {
        Ok(s) => CheckResult {
            name: "slope".into(),
            passed: s >= rlo - spec.tolerance && s <= rhi + spec.tolerance,
            measured: s,
            bound: rhi,
            tolerance: spec.tolerance,
            detail: format!(
                "slope of log {what} over k in [{lo}, {hi}] must lie in [{rlo}, {rhi}]"
            ),
        },
        Err(e) => CheckResult::failed("slope", format!("cannot fit slope: {e}")),
    }
}

/// Theoretical per-step factor of the regime for the step from record `i`.
fn regime_factor(problem: &Problem, trace: &Trace, i: usize) -> f64 {
    let r = &trace.records[i];
    let d0 = trace.d0;
    match trace.config.regime {
        Regime::TrppmFixedT | Regime::Bpm | Regime::TrppmFixedLambda => 1.0 / (1.0 + r.t_k / d0),
        Regime::TrppmUnconstrained => {
            let mu = problem.strong_convexity().unwrap_or(0.0);
            1.0 / (1.0 + r.t_k / d0).min(1.0 + mu / r.lambda_k)
        }
        Regime::Ppm => r.q_k,
    }
}

/// `f_gap_{k+1} / f_gap_k` against the regime's per-step factor at every
/// step taken from outside the stopping neighborhood.
pub fn contraction(problem: &Problem, trace: &Trace, tol: f64) -> CheckResult {
    let stop = trace.config.effective_stop_dist();
    let mut excess = f64::NEG_INFINITY;
    let mut measured = 0.0;
    let mut bound = 0.0;
    for i in 0..trace.records.len().saturating_sub(1) {
        let (a, b) = (&trace.records[i], &trace.records[i + 1]);
        if a.dist <= stop || a.f_gap == 0.0 {
            continue;
        }
        let ratio = b.f_gap / a.f_gap;
        let factor = regime_factor(problem, trace, i);
        if ratio - factor > excess {
            excess = ratio - factor;
            measured = ratio;
            bound = factor;
        }
    }
    CheckResult::at_most(
        "contraction",
        measured,
        bound,
        tol,
        "worst f_gap ratio against its per-step factor",
    )
}

/// `f_gap_{k+1} <= q_k f_gap_k` whenever `x_{k+1}` is not the anchor.
pub fn q_descent(trace: &Trace, tol: f64) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for w in trace.records.windows(2) {
        if w[0].q_k > 0.0 {
            worst = worst.max(w[1].f_gap - w[0].q_k * w[0].f_gap);
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    CheckResult::at_most(
        "q_descent",
        worst,
        0.0,
        tol,
        "max f_gap_{k+1} - q_k f_gap_k",
    )
}

/// `phi(lambda_k, x_k) >= t_k` at every step taken; measures `min(phi - t_k)`.
pub fn admissible_lambda(problem: &Problem, trace: &Trace, tol: f64) -> CheckResult {
    let n = trace.records.len();
    let mut worst = f64::INFINITY;
    for r in &trace.records[..n - 1] {
        if !r.t_k.is_finite() {
            continue;
        }
        match phi_raw(problem, r.lambda_k, r.x.as_slice()) {
            Ok(phi) => worst = worst.min(phi - r.t_k),
            Err(e) => return CheckResult::failed("admissible_lambda", e.to_string()),
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    // Stated as -(phi - t) <= tol.
    CheckResult::at_most(
        "admissible_lambda",
        -worst,
        0.0,
        tol,
        "max of t_k - phi(lambda_k, x_k)",
    )
}

pub fn non_increasing_gap(trace: &Trace) -> CheckResult {
    non_increasing("descent", trace, 0.0, |r| r.f_gap)
}

pub fn non_increasing_dist(trace: &Trace) -> CheckResult {
    non_increasing("fejer", trace, 0.0, |r| r.dist)
}
