//! Proximal point, broximal point and trust-region proximal point iterations
//! with per-iterate traces and theoretical envelopes.

use std::fmt;
use std::str::FromStr;

use crate::displacement::{
    lambda_star_raw, m_f_closed_form, m_f_grid_seeded, phi_raw, weak_sharp_lambda_raw, MfQuery,
    GRID_SEED,
};
use crate::error::{Error, Result};
use crate::linalg::{dist, Vector};
use crate::problem::Problem;
use crate::prox::{prox_raw, tr_prox_raw, ProxResult};

/// Shading applied to the bisected critical regularization.
pub const LAMBDA_STAR_SAFETY: f64 = 0.99;
/// Relative tolerance of the critical-regularization bisection.
pub const LAMBDA_STAR_TOL: f64 = 1e-10;
/// Extra shading on sampled (rather than closed-form) displacement bounds.
pub const GRID_SAFETY: f64 = 0.9;
/// Sample budget for sampled displacement bounds.
pub const GRID_SAMPLES: usize = 10_000;
/// Steps shorter than this end the run.
pub const MIN_STEP: f64 = 1e-14;
/// Tolerance of the BPM/TRPPM equivalence check.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Ppm,
    Bpm,
    TrppmFixedT,
    TrppmFixedLambda,
    TrppmUnconstrained,
}

impl Regime {
    pub const NAMES: [&'static str; 5] = [
        "ppm",
        "bpm",
        "trppm_fixed_t",
        "trppm_fixed_lambda",
        "trppm_unconstrained",
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Ppm => "ppm",
            Regime::Bpm => "bpm",
            Regime::TrppmFixedT => "trppm_fixed_t",
            Regime::TrppmFixedLambda => "trppm_fixed_lambda",
            Regime::TrppmUnconstrained => "trppm_unconstrained",
        }
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ppm" => Ok(Regime::Ppm),
            "bpm" => Ok(Regime::Bpm),
            "trppm_fixed_t" => Ok(Regime::TrppmFixedT),
            "trppm_fixed_lambda" => Ok(Regime::TrppmFixedLambda),
            "trppm_unconstrained" => Ok(Regime::TrppmUnconstrained),
            _ => Err(format!(
                "unknown regime `{s}` (expected one of: {})",
                Regime::NAMES.join(", ")
            )),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the fixed-radius regime picks its regularization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    /// Shaded bisection for the largest admissible value.
    Bisection,
    /// Explicit bound from weak-sharp constants.
    WeakSharp,
    /// The configured `lambda`, unchecked.
    Constant,
}

impl LambdaRule {
    pub const NAMES: [&'static str; 3] = ["bisection", "weak_sharp", "constant"];

    pub fn as_str(&self) -> &'static str {
        match self {
            LambdaRule::Bisection => "bisection",
            LambdaRule::WeakSharp => "weak_sharp",
            LambdaRule::Constant => "constant",
        }
    }
}

impl FromStr for LambdaRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bisection" => Ok(LambdaRule::Bisection),
            "weak_sharp" => Ok(LambdaRule::WeakSharp),
            "constant" => Ok(LambdaRule::Constant),
            _ => Err(format!(
                "unknown lambda rule `{s}` (expected one of: {})",
                LambdaRule::NAMES.join(", ")
            )),
        }
    }
}

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub regime: Regime,
    /// Trust-region radius, `f64::INFINITY` for none.
    pub t: f64,
    pub lambda: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub lambda_rule: LambdaRule,
    pub max_iters: usize,
    /// Stop once `dist(x_k, X*)` drops to this value. Defaults per regime.
    pub stop_dist: Option<f64>,
}

impl SolverConfig {
    pub fn ppm(lambda: f64, max_iters: usize) -> Self {
        SolverConfig {
            regime: Regime::Ppm,
            t: f64::INFINITY,
            lambda,
            theta: 1.0,
            epsilon: 0.0,
            lambda_rule: LambdaRule::Constant,
            max_iters,
            stop_dist: None,
        }
    }

    pub fn bpm(t: f64, max_iters: usize) -> Self {
        SolverConfig {
            regime: Regime::Bpm,
            t,
            lambda: 0.0,
            ..Self::ppm(0.0, max_iters)
        }
    }

    pub fn fixed_t(t: f64, lambda_rule: LambdaRule, max_iters: usize) -> Self {
        SolverConfig {
            regime: Regime::TrppmFixedT,
            t,
            lambda_rule,
            ..Self::ppm(0.0, max_iters)
        }
    }

    pub fn fixed_lambda(lambda: f64, epsilon: f64, theta: f64, max_iters: usize) -> Self {
        SolverConfig {
            regime: Regime::TrppmFixedLambda,
            epsilon,
            theta,
            ..Self::ppm(lambda, max_iters)
        }
    }

    pub fn unconstrained(lambda: f64, t: f64, max_iters: usize) -> Self {
        SolverConfig {
            regime: Regime::TrppmUnconstrained,
            t,
            ..Self::ppm(lambda, max_iters)
        }
    }

    /// Checks the regime-specific parameter constraints.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if self.t.is_nan() || self.t <= 0.0 {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            ));
        }
        if let Some(s) = self.stop_dist {
            if !(s >= 0.0) {
                return bad(format!("stop_dist must be nonnegative, got {s}"));
            }
        }
        match self.regime {
            Regime::Ppm => {
                if self.lambda <= 0.0 || self.t.is_finite() {
                    return bad("ppm needs lambda > 0 and t = inf".into());
                }
            }
            Regime::Bpm => {
                if self.lambda != 0.0 || !self.t.is_finite() {
                    return bad("bpm needs lambda = 0 and finite t".into());
                }
            }
            Regime::TrppmFixedT => {
                if !self.t.is_finite() {
                    return bad("trppm_fixed_t needs finite t".into());
                }
            }
            Regime::TrppmFixedLambda => {
                if self.lambda <= 0.0 {
                    return bad("trppm_fixed_lambda needs lambda > 0".into());
                }
                if !(self.theta > 0.0 && self.theta <= 1.0) {
                    return bad(format!("theta must lie in (0, 1], got {}", self.theta));
                }
                if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
                    return bad(format!("epsilon must be positive, got {}", self.epsilon));
                }
            }
            Regime::TrppmUnconstrained => {
                if self.lambda <= 0.0 {
                    return bad("trppm_unconstrained needs lambda > 0".into());
                }
            }
        }
        Ok(())
    }

    /// The neighborhood radius that ends a run.
    pub fn effective_stop_dist(&self) -> f64 {
        self.stop_dist.unwrap_or(match self.regime {
            Regime::TrppmFixedT | Regime::Bpm => self.t,
            Regime::TrppmFixedLambda => self.epsilon,
            Regime::Ppm | Regime::TrppmUnconstrained => 0.0,
        })
    }
}

/// State at iterate `k` together with the step taken from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vector,
    pub f_gap: f64,
    pub dist: f64,
    /// `||x_k - x_{k+1}||`; zero on the final record.
    pub step_len: f64,
    pub active: bool,
    pub lambda_k: f64,
    pub t_k: f64,
    /// `(1 + step_len / ||x_{k+1} - x*||)^-1`, zero if `x_{k+1} = x*`, one on the final record.
    pub q_k: f64,
    /// Theoretical bound on `f_gap` at this iterate.
    pub envelope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    NeighborhoodReached,
    MaxIters,
    FixedPoint,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::NeighborhoodReached => "neighborhood_reached",
            Termination::MaxIters => "max_iters",
            Termination::FixedPoint => "fixed_point",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub config: SolverConfig,
    pub records: Vec<IterateRecord>,
    pub terminated: Termination,
    /// The minimizer used for `q_k`.
    pub anchor: Vector,
    pub d0: f64,
    /// Constant radius chosen by the fixed-lambda regime.
    pub t_used: Option<f64>,
}

impl Trace {
    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("traces are non-empty")
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Minimizer for `q_k`; defaults to the projection of `x0`.
    pub anchor: Option<Vector>,
    /// Seed for sampled displacement bounds; defaults to [`GRID_SEED`].
    pub grid_seed: Option<u64>,
}

/// One proximal point step.
pub fn step_ppm(problem: &Problem, x: &Vector, lambda: f64) -> Result<Vector> {
    crate::prox::prox(problem, lambda, x)
}

/// One trust-region proximal point step (a broximal step when `lambda = 0`).
pub fn step_trppm(problem: &Problem, x: &Vector, lambda: f64, t: f64) -> Result<ProxResult> {
    crate::prox::tr_prox(&crate::prox::SubproblemSpec::new(problem, x, lambda, t))
}

pub fn run(problem: &Problem, x0: &Vector, config: &SolverConfig) -> Result<Trace> {
    run_with(problem, x0, config, &RunOptions::default())
}

pub fn run_with(
    problem: &Problem,
    x0: &Vector,
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<Trace> {
    config.validate()?;
    problem.check_dim(x0)?;
    let gap = |x: &[f64]| (problem.eval(x) - problem.f_inf()).max(0.0);
    let gap0 = gap(x0.as_slice());
    if !gap0.is_finite() {
        return Err(Error::Precondition(
            "x0 lies outside the domain of f".into(),
        ));
    }
    let anchor = match &opts.anchor {
        Some(a) => {
            problem.check_dim(a)?;
            if problem.dist(a.as_slice()) > 0.0 {
                return Err(Error::Precondition("anchor is not a minimizer".into()));
            }
            a.clone()
        }
        None => problem.solution_projection(x0)?,
    };
    let d0 = dist(x0.as_slice(), anchor.as_slice());

    // Without strong convexity the unconstrained envelope degenerates to gap0.
    let mu = problem.strong_convexity().unwrap_or(0.0);

    let t_used = match config.regime {
        Regime::TrppmFixedLambda => {
            let m = match m_f_closed_form(problem, config.epsilon, config.lambda) {
                Ok(m) => m,
                Err(Error::Unsupported { .. }) => {
                    let q = MfQuery {
                        problem,
                        x0: x0.clone(),
                        epsilon: config.epsilon,
                        lambda: config.lambda,
                        anchor: anchor.clone(),
                    };
                    GRID_SAFETY
                        * m_f_grid_seeded(&q, GRID_SAMPLES, opts.grid_seed.unwrap_or(GRID_SEED))?
                }
                Err(e) => return Err(e),
            };
            let t = config.theta * m;
            if !(t > 0.0) {
                return Err(Error::NumericalFailure {
                    context: "fixed-lambda radius",
                    residual: t,
                });
            }
            Some(t)
        }
        _ => None,
    };

    let stop = config.effective_stop_dist();
    let mut records = Vec::new();
    let mut x = x0.as_slice().to_vec();
    let mut envelope = gap0;
    let mut stalled = false;

    let terminated = loop {
        let k = records.len();
        let d = problem.dist(&x);
        let f_gap = gap(&x);
        if config.regime == Regime::Ppm && k > 0 {
            envelope = gap0.min(d0 * d0 * config.lambda / (2.0 * k as f64));
        }
        let reason = if d == 0.0 || stalled {
            Some(Termination::FixedPoint)
        } else if d <= stop {
            Some(Termination::NeighborhoodReached)
        } else if k == config.max_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };

        let chosen = match reason {
            Some(r) => Err(r),
            None => match select_parameters(problem, &x, config, t_used) {
                Ok(p) => Ok(p),
                Err(Error::Precondition(_)) => Err(Termination::NeighborhoodReached),
                Err(e) => return Err(e),
            },
        };
        let (lambda_k, t_k) = match chosen {
            Ok(p) => p,
            Err(r) => {
                records.push(IterateRecord {
                    k,
                    x: Vector::from_vec(x),
                    f_gap,
                    dist: d,
                    step_len: 0.0,
                    active: false,
                    lambda_k: 0.0,
                    t_k: t_used.unwrap_or(config.t),
                    q_k: 1.0,
                    envelope,
                });
                break r;
            }
        };

        let (next, active) = if config.regime == Regime::Ppm {
            (prox_raw(problem, lambda_k, &x)?.0, false)
        } else {
            let r = tr_prox_raw(problem, &x, lambda_k, t_k)?;
            (r.point.into_vec(), r.active)
        };
        let step_len = dist(&x, &next);
        let r = dist(&next, anchor.as_slice());
        let q_k = if r == 0.0 {
            0.0
        } else {
            1.0 / (1.0 + step_len / r)
        };

        records.push(IterateRecord {
            k,
            x: Vector::from_vec(std::mem::replace(&mut x, next)),
            f_gap,
            dist: d,
            step_len,
            active,
            lambda_k,
            t_k,
            q_k,
            envelope,
        });
        stalled = step_len < MIN_STEP;

        envelope *= match config.regime {
            Regime::TrppmFixedT | Regime::Bpm => 1.0 / (1.0 + t_k / d0),
            Regime::TrppmFixedLambda => 1.0 / (1.0 + t_k / d0),
            Regime::TrppmUnconstrained => 1.0 / (1.0 + t_k / d0).min(1.0 + mu / lambda_k),
            Regime::Ppm => 1.0,
        };
    };

    Ok(Trace {
        config: config.clone(),
        records,
        terminated,
        anchor,
        d0,
        t_used,
    })
}

/// Regularization and radius for the step from `x`.
fn select_parameters(
    problem: &Problem,
    x: &[f64],
    config: &SolverConfig,
    t_used: Option<f64>,
) -> Result<(f64, f64)> {
    Ok(match config.regime {
        Regime::Ppm | Regime::TrppmUnconstrained => (config.lambda, config.t),
        Regime::Bpm => (0.0, config.t),
        Regime::TrppmFixedLambda => (config.lambda, t_used.expect("set for fixed-lambda runs")),
        Regime::TrppmFixedT => {
            let t = config.t;
            let lambda = match config.lambda_rule {
                LambdaRule::Bisection => {
                    LAMBDA_STAR_SAFETY * lambda_star_raw(problem, x, t, LAMBDA_STAR_TOL)?
                }
                LambdaRule::WeakSharp => weak_sharp_lambda_raw(problem, x, t)?,
                LambdaRule::Constant => config.lambda,
            };
            (lambda, t)
        }
    })
}

/// Horizontal axis of a rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitBasis {
    /// `log(value)` against `k`: slope is the log of a linear rate.
    Linear,
    /// `log(value)` against `log k`: slope is a power-law exponent.
    LogLog,
}

/// Which per-iterate quantity is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateQuantity {
    FGap,
    Dist,
}

/// Least-squares slope of `log(quantity)` over records with `k` in `[k_lo, k_hi]`.
pub fn empirical_rate(
    trace: &Trace,
    window: (usize, usize),
    basis: FitBasis,
    quantity: RateQuantity,
) -> Result<f64> {
    let (lo, hi) = window;
    if lo > hi || hi >= trace.records.len() {
        return Err(Error::InvalidParameter(format!(
            "window [{lo}, {hi}] does not fit a trace of {} records",
            trace.records.len()
        )));
    }
    if basis == FitBasis::LogLog && lo == 0 {
        return Err(Error::InvalidParameter("log-log fits need k >= 1".into()));
    }
    let mut pts = Vec::with_capacity(hi - lo + 1);
    for r in &trace.records[lo..=hi] {
        let v = match quantity {
            RateQuantity::FGap => r.f_gap,
            RateQuantity::Dist => r.dist,
        };
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nonpositive value {v} at k = {}",
                r.k
            )));
        }
        let k = r.k as f64;
        pts.push((if basis == FitBasis::LogLog { k.ln() } else { k }, v.ln()));
    }
    fit_slope(&pts)
}

/// Ordinary least-squares slope.
pub fn fit_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "a slope needs at least two points".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissae".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub equal: bool,
    pub discrepancy: f64,
    pub brox: Vector,
    pub tr_prox: Vector,
}

/// Compares the broximal step with the trust-region proximal step when both
/// the proximal point and the solution set lie outside the ball.
pub fn check_bpm_equivalence(
    problem: &Problem,
    x: &Vector,
    lambda: f64,
    t: f64,
) -> Result<Equivalence> {
    problem.check_dim(x)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t must be positive and finite, got {t}"
        )));
    }
    let xs = x.as_slice();
    let phi = phi_raw(problem, lambda, xs)?;
    let d = problem.dist(xs);
    let mut failed = Vec::new();
    if phi <= t {
        failed.push(format!(
            "proximal point lies inside the ball (phi = {phi} <= t = {t})"
        ));
    }
    if d <= t {
        failed.push(format!(
            "solution set meets the ball (dist = {d} <= t = {t})"
        ));
    }
    if !failed.is_empty() {
        return Err(Error::Precondition(failed.join("; ")));
    }
    let b = tr_prox_raw(problem, xs, 0.0, t)?.point;
    let p = tr_prox_raw(problem, xs, lambda, t)?.point;
    let discrepancy = dist(b.as_slice(), p.as_slice());
    Ok(Equivalence {
        equal: discrepancy <= EQUIVALENCE_TOL,
        discrepancy,
        brox: b,
        tr_prox: p,
    })
}
