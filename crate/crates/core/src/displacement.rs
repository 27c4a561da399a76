//! Displacement `phi(lambda, x) = ||x - prox(lambda, x)||`, the critical
//! regularization at which it equals a given radius, and uniform lower bounds
//! of it away from the solution set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dist, Vector};
use crate::problem::{Objective, Problem};
use crate::prox::prox_raw;

/// Seed of the low-discrepancy sampler used by [`m_f_grid`].
pub const GRID_SEED: u64 = 42;

/// Smallest sample budget accepted by [`m_f_grid`].
pub const MIN_GRID_SAMPLES: usize = 1000;

/// Lower end of the `lambda_star` bisection bracket.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Slack when deciding whether a sample lies at distance at least epsilon.
const SHELL_TOL: f64 = 1e-12;

/// Slack when checking that an anchor is a minimizer.
const ANCHOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct DisplacementQuery<'a> {
    pub problem: &'a Problem,
    pub x: &'a Vector,
    pub lambda: f64,
}

/// `phi(lambda, x)`; `phi(0, x) = dist(x, X*)`.
pub fn phi(q: &DisplacementQuery<'_>) -> Result<f64> {
    q.problem.check_dim(q.x)?;
    if q.lambda.is_nan() || q.lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {}",
            q.lambda
        )));
    }
    phi_raw(q.problem, q.lambda, q.x.as_slice())
}

pub(crate) fn phi_raw(problem: &Problem, lambda: f64, x: &[f64]) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(problem.dist(x));
    }
    if lambda == f64::INFINITY {
        return Ok(0.0);
    }
    let (u, _) = prox_raw(problem, lambda, x)?;
    Ok(dist(x, &u))
}

fn gap(problem: &Problem, x: &[f64]) -> f64 {
    (problem.eval(x) - problem.f_inf()).max(0.0)
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "t must be positive and finite, got {t}"
        )))
    }
}

/// `2 (f(x) - f_inf) / t^2`.
pub fn lambda_star_upper_bound(problem: &Problem, x: &Vector, t: f64) -> Result<f64> {
    problem.check_dim(x)?;
    check_t(t)?;
    Ok(2.0 * gap(problem, x.as_slice()) / (t * t))
}

/// Largest `lambda` (up to relative `tol`) with `phi(lambda, x) >= t`.
///
/// The returned value always satisfies `phi(lambda, x) >= t`, so every
/// smaller regularization keeps the trust-region constraint active.
pub fn lambda_star(problem: &Problem, x: &Vector, t: f64, tol: f64) -> Result<f64> {
    problem.check_dim(x)?;
    check_t(t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    lambda_star_raw(problem, x.as_slice(), t, tol)
}

pub(crate) fn lambda_star_raw(problem: &Problem, x: &[f64], t: f64, tol: f64) -> Result<f64> {
    let d = problem.dist(x);
    if d <= t {
        return Err(Error::Precondition(format!(
            "lambda_star needs dist(x, X*) > t, got dist {d} <= t {t}"
        )));
    }
    let mut hi = 2.0 * gap(problem, x) / (t * t);
    if !hi.is_finite() {
        return Err(Error::Unsupported {
            operation: "lambda_star at a point with infinite objective",
            problem: problem.name().to_string(),
        });
    }
    let phi_at = |l: f64| phi_raw(problem, l, x);
    if phi_at(hi)? >= t {
        return Ok(hi);
    }
    let mut lo = LAMBDA_FLOOR.min(hi);
    let mut phi_lo = phi_at(lo)?;
    let mut shrinks = 0;
    while phi_lo < t {
        lo *= 1e-3;
        shrinks += 1;
        if lo == 0.0 || shrinks > 100 {
            return Err(Error::NumericalFailure {
                context: "lambda_star lower bracket",
                residual: t - phi_lo,
            });
        }
        phi_lo = phi_at(lo)?;
    }
    // Invariant: phi(lo) >= t > phi(hi).
    while hi > lo * (1.0 + tol) && phi_lo - t > tol * t {
        let mid = (lo * hi).sqrt();
        let phi_mid = phi_at(mid)?;
        if phi_mid >= t {
            lo = mid;
            phi_lo = phi_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Admissible regularization from weak sharpness: any smaller value keeps
/// `phi(lambda, x) >= t`.
pub fn weak_sharp_lambda(problem: &Problem, x: &Vector, t: f64) -> Result<f64> {
    problem.check_dim(x)?;
    check_t(t)?;
    weak_sharp_lambda_raw(problem, x.as_slice(), t)
}

pub(crate) fn weak_sharp_lambda_raw(problem: &Problem, x: &[f64], t: f64) -> Result<f64> {
    let ws = problem.weak_sharp().ok_or_else(|| Error::Unsupported {
        operation: "weak_sharp_lambda (no weak-sharp constants)",
        problem: problem.name().to_string(),
    })?;
    let d = problem.dist(x);
    if d <= t {
        return Err(Error::Precondition(format!(
            "weak_sharp_lambda needs dist(x, X*) > t, got dist {d} <= t {t}"
        )));
    }
    let alpha = ws.alpha;
    if ws.order == 1.0 {
        Ok(2.0 * alpha * alpha / (gap(problem, x) + alpha * t))
    } else {
        Ok(2.0 * alpha * (d - t).powf(ws.order - 1.0) / (d + t))
    }
}

/// Closed-form uniform displacement bound for problems where it is known.
pub fn m_f_closed_form(problem: &Problem, epsilon: f64, lambda: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let unsupported = || Error::Unsupported {
        operation: "closed-form m_f",
        problem: problem.name().to_string(),
    };
    match problem.objective() {
        Objective::IndicatorBox { .. } | Objective::IndicatorBall { .. } => Ok(epsilon),
        Objective::ScaledAbs { mu } => Ok(if lambda == 0.0 {
            epsilon
        } else {
            epsilon.min(mu / lambda)
        }),
        Objective::Quadratic(qf) => {
            let s = qf.sigma_plus().ok_or_else(unsupported)?;
            Ok(s / (s + lambda) * epsilon)
        }
        Objective::Quartic1D | Objective::SharpNorm { .. } => Err(unsupported()),
    }
}

/// Query for the sampled uniform displacement bound over
/// `{x : ||x - anchor|| <= ||x0 - anchor||, dist(x, X*) >= epsilon}`.
#[derive(Debug, Clone)]
pub struct MfQuery<'a> {
    pub problem: &'a Problem,
    pub x0: Vector,
    pub epsilon: f64,
    pub lambda: f64,
    pub anchor: Vector,
}

impl<'a> MfQuery<'a> {
    /// Anchors the ball at the projection of `x0` onto the solution set.
    pub fn new(problem: &'a Problem, x0: &Vector, epsilon: f64, lambda: f64) -> Result<Self> {
        let anchor = problem.solution_projection(x0)?;
        Ok(MfQuery {
            problem,
            x0: x0.clone(),
            epsilon,
            lambda,
            anchor,
        })
    }

    pub fn with_anchor(mut self, anchor: Vector) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn radius(&self) -> f64 {
        dist(self.x0.as_slice(), self.anchor.as_slice())
    }

    fn validate(&self) -> Result<()> {
        self.problem.check_dim(&self.x0)?;
        self.problem.check_dim(&self.anchor)?;
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        let g = self.problem.eval(self.anchor.as_slice()) - self.problem.f_inf();
        if !(g.abs() <= ANCHOR_TOL) {
            return Err(Error::Precondition(format!(
                "anchor is not a minimizer: f(anchor) - f_inf = {g}"
            )));
        }
        Ok(())
    }
}

/// Sampled estimate of the uniform displacement bound with the default seed.
///
/// The sample minimum can only over-estimate the true minimum.
pub fn m_f_grid(q: &MfQuery<'_>, samples: usize) -> Result<f64> {
    m_f_grid_seeded(q, samples, GRID_SEED)
}

pub fn m_f_grid_seeded(q: &MfQuery<'_>, samples: usize, seed: u64) -> Result<f64> {
    q.validate()?;
    if samples < MIN_GRID_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "m_f_grid needs at least {MIN_GRID_SAMPLES} samples, got {samples}"
        )));
    }
    let sampler = BallSampler::new(q.anchor.as_slice(), q.radius(), seed);
    let (best, accepted) = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, usize)> {
            let x = sampler.point(i);
            if q.problem.dist(&x) < q.epsilon - SHELL_TOL {
                return Ok((f64::INFINITY, 0));
            }
            Ok((phi_raw(q.problem, q.lambda, &x)?, 1))
        })
        .try_reduce(|| (f64::INFINITY, 0), |a, b| Ok((a.0.min(b.0), a.1 + b.1)))?;
    if accepted == 0 {
        return Err(Error::InfeasibleRegion {
            epsilon: q.epsilon,
            radius: q.radius(),
        });
    }
    Ok(best)
}

/// Deterministic low-discrepancy points in a closed ball: a randomly shifted
/// Halton sequence pushed through a radial-spherical map.
#[derive(Debug, Clone)]
pub struct BallSampler {
    center: Vec<f64>,
    radius: f64,
    bases: Vec<u64>,
    shift: Vec<f64>,
}

impl BallSampler {
    pub fn new(center: &[f64], radius: f64, seed: u64) -> Self {
        let d = center.len();
        // One coordinate for the radius, the rest for the direction.
        let dims = match d {
            1 => 1,
            2 => 2,
            _ => 1 + 2 * d.div_ceil(2),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dims).map(|_| rng.random::<f64>()).collect();
        BallSampler {
            center: center.to_vec(),
            radius,
            bases: first_primes(dims),
            shift,
        }
    }

    fn unit(&self, i: usize, k: usize) -> f64 {
        let u = radical_inverse(i as u64 + 1, self.bases[k]) + self.shift[k];
        u - u.floor()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let d = self.center.len();
        let offset: Vec<f64> = match d {
            1 => vec![self.radius * (2.0 * self.unit(i, 0) - 1.0)],
            2 => {
                let r = self.radius * self.unit(i, 0).sqrt();
                let th = std::f64::consts::TAU * self.unit(i, 1);
                vec![r * th.cos(), r * th.sin()]
            }
            _ => {
                let mut g = Vec::with_capacity(d + 1);
                for pair in 0..d.div_ceil(2) {
                    // Box-Muller; keep the log argument away from zero.
                    let u1 = self.unit(i, 1 + 2 * pair).max(f64::MIN_POSITIVE);
                    let u2 = self.unit(i, 2 + 2 * pair);
                    let m = (-2.0 * u1.ln()).sqrt();
                    let th = std::f64::consts::TAU * u2;
                    g.push(m * th.cos());
                    g.push(m * th.sin());
                }
                g.truncate(d);
                let n = crate::linalg::norm(&g);
                let r = self.radius * self.unit(i, 0).powf(1.0 / d as f64);
                if n == 0.0 {
                    let mut e = vec![0.0; d];
                    e[0] = r;
                    e
                } else {
                    g.iter().map(|v| r * v / n).collect()
                }
            }
        };
        self.center.iter().zip(offset).map(|(c, o)| c + o).collect()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes
            .iter()
            .take_while(|p| *p * *p <= c)
            .all(|p| !c.is_multiple_of(*p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
