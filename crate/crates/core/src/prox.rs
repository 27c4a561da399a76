//! Proximal, trust-region proximal and broximal maps for catalog problems.

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, Vector};
use crate::problem::{Objective, Problem, QuadraticForm};
use crate::roots::newton_bisect;

/// Outcome of a ball-constrained proximal subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub point: Vector,
    /// The ball constraint is tight at `point`.
    pub active: bool,
    /// Boundary multiplier `c` with `(c + lambda)(x - point)` a subgradient of
    /// `f` at `point`. Zero for interior solutions, absent when not available.
    pub multiplier: Option<f64>,
    /// `f(point) + lambda/2 * ||point - x||^2`.
    pub objective_at_point: f64,
    /// Residual of the inner scalar solve, zero for closed forms.
    pub subproblem_residual: f64,
    /// `false` when the subproblem has several minimizers and `point` is the
    /// deterministic representative.
    pub unique: bool,
}

/// Parameters of `argmin_{||z - center|| <= radius} f(z) + lambda/2 ||z - center||^2`.
#[derive(Debug, Clone, Copy)]
pub struct SubproblemSpec<'a> {
    pub problem: &'a Problem,
    pub center: &'a Vector,
    pub lambda: f64,
    /// May be `f64::INFINITY`.
    pub radius: f64,
}

impl<'a> SubproblemSpec<'a> {
    pub fn new(problem: &'a Problem, center: &'a Vector, lambda: f64, radius: f64) -> Self {
        SubproblemSpec {
            problem,
            center,
            lambda,
            radius,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda < 0.0 || lambda == f64::INFINITY {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

fn check_radius(t: f64) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "trust-region radius must be positive, got {t}"
        )));
    }
    Ok(())
}

/// `argmin_z f(z) + lambda/2 ||z - x||^2` for `lambda > 0`.
pub fn prox(problem: &Problem, lambda: f64, x: &Vector) -> Result<Vector> {
    problem.check_dim(x)?;
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "prox needs lambda > 0; use prox_zero for lambda = 0".into(),
        ));
    }
    Ok(Vector::from_vec(prox_raw(problem, lambda, x.as_slice())?.0))
}

/// The `lambda = 0` convention: projection onto the minimizer set.
pub fn prox_zero(problem: &Problem, x: &Vector) -> Result<Vector> {
    problem.solution_projection(x)
}

/// Unchecked proximal map; also returns the inner solve residual.
pub(crate) fn prox_raw(problem: &Problem, lambda: f64, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let point = match problem.objective() {
        Objective::Quartic1D => {
            let (z, r) = quartic_prox(lambda, x[0])?;
            return Ok((vec![z], r));
        }
        Objective::ScaledAbs { mu } => soft_threshold(x, mu / lambda),
        Objective::Quadratic(qf) => {
            let y = qf.eigen().to_eigenbasis(x);
            let w: Vec<f64> = qf
                .eigen()
                .values
                .iter()
                .zip(&y)
                .map(|(s, yi)| lambda / (lambda + s) * yi)
                .collect();
            qf.eigen().from_eigenbasis(&w)
        }
        Objective::IndicatorBox { .. } | Objective::IndicatorBall { .. } => problem.project(x),
        Objective::SharpNorm { alpha } => {
            let n = norm(x);
            let scale = if n > 0.0 {
                (1.0 - alpha / (lambda * n)).max(0.0)
            } else {
                0.0
            };
            x.iter().map(|v| v * scale).collect()
        }
    };
    Ok((point, 0.0))
}

pub(crate) fn soft_threshold(x: &[f64], tau: f64) -> Vec<f64> {
    x.iter()
        .map(|v| v.signum() * (v.abs() - tau).max(0.0))
        .collect()
}

/// Real root of `z^3 + lambda (z - x) = 0`, which lies between 0 and `x`.
fn quartic_prox(lambda: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, 0.0));
    }
    let root = newton_bisect(
        |z| (z * z * z + lambda * (z - x), 3.0 * z * z + lambda),
        0.0_f64.min(x),
        0.0_f64.max(x),
        x,
        0.0,
        "quartic prox",
    )?;
    Ok((root.x, root.residual))
}

fn subproblem_objective(problem: &Problem, lambda: f64, x: &[f64], z: &[f64]) -> f64 {
    let f = problem.eval(z);
    if lambda == 0.0 {
        f
    } else {
        let d = dist(z, x);
        f + 0.5 * lambda * d * d
    }
}

/// Ball-constrained proximal subproblem. Delegates to [`brox`] when `lambda = 0`.
pub fn tr_prox(spec: &SubproblemSpec<'_>) -> Result<ProxResult> {
    let SubproblemSpec {
        problem,
        center,
        lambda,
        radius,
    } = *spec;
    problem.check_dim(center)?;
    check_lambda(lambda)?;
    check_radius(radius)?;
    tr_prox_raw(problem, center.as_slice(), lambda, radius)
}

pub(crate) fn tr_prox_raw(problem: &Problem, x: &[f64], lambda: f64, t: f64) -> Result<ProxResult> {
    if lambda == 0.0 {
        if t == f64::INFINITY {
            // Minimizing f over the whole space: any minimizer, take the projection.
            let p = problem.project(x);
            return Ok(interior(
                problem,
                0.0,
                x,
                p,
                0.0,
                problem.solution_set_is_singleton(),
            ));
        }
        return brox_raw(problem, x, t);
    }
    let (u, residual) = prox_raw(problem, lambda, x)?;
    if dist(&u, x) <= t {
        return Ok(interior(problem, lambda, x, u, residual, true));
    }
    boundary(problem, x, lambda, t, &u)
}

/// `argmin_{||z - x|| <= t} f(z)`.
pub fn brox(problem: &Problem, x: &Vector, t: f64) -> Result<ProxResult> {
    problem.check_dim(x)?;
    check_radius(t)?;
    if t == f64::INFINITY {
        return tr_prox_raw(problem, x.as_slice(), 0.0, t);
    }
    brox_raw(problem, x.as_slice(), t)
}

fn brox_raw(problem: &Problem, x: &[f64], t: f64) -> Result<ProxResult> {
    let p = problem.project(x);
    if dist(&p, x) <= t {
        return Ok(interior(
            problem,
            0.0,
            x,
            p,
            0.0,
            problem.solution_set_is_singleton(),
        ));
    }
    boundary(problem, x, 0.0, t, &p)
}

fn interior(
    problem: &Problem,
    lambda: f64,
    x: &[f64],
    point: Vec<f64>,
    residual: f64,
    unique: bool,
) -> ProxResult {
    ProxResult {
        objective_at_point: subproblem_objective(problem, lambda, x, &point),
        point: Vector::from_vec(point),
        active: false,
        multiplier: Some(0.0),
        subproblem_residual: residual,
        unique,
    }
}

/// Solves the subproblem on the sphere `||z - x|| = t`, given that the
/// unconstrained minimizer `u` lies strictly outside the ball.
fn boundary(problem: &Problem, x: &[f64], lambda: f64, t: f64, u: &[f64]) -> Result<ProxResult> {
    let mut unique = true;
    let (point, multiplier, residual) = match problem.objective() {
        Objective::Quadratic(qf) => {
            let (z, c, r) = quadratic_boundary(qf, x, lambda, t)?;
            (z, Some(c), r)
        }
        Objective::ScaledAbs { mu } => {
            let tau = l1_threshold(x, t);
            let z = soft_threshold(x, tau);
            (z, Some((mu / tau - lambda).max(0.0)), 0.0)
        }
        Objective::SharpNorm { alpha } => {
            let n = norm(x);
            let z: Vec<f64> = x.iter().map(|v| v * (1.0 - t / n)).collect();
            (z, Some((alpha / t - lambda).max(0.0)), 0.0)
        }
        Objective::Quartic1D => {
            let z = x[0] + t * (u[0] - x[0]).signum();
            let c = (z.abs().powi(3) / t - lambda).max(0.0);
            (vec![z], Some(c), 0.0)
        }
        Objective::IndicatorBox { .. } | Objective::IndicatorBall { .. } => {
            // The ball misses the constraint set; every point has infinite
            // objective. Step along the ray toward the projection.
            unique = false;
            let d = dist(u, x);
            let z: Vec<f64> = x
                .iter()
                .zip(u)
                .map(|(xi, ui)| xi + t * (ui - xi) / d)
                .collect();
            (z, None, 0.0)
        }
    };
    let radial = (dist(&point, x) - t).abs();
    Ok(ProxResult {
        objective_at_point: subproblem_objective(problem, lambda, x, &point),
        point: Vector::from_vec(point),
        active: true,
        multiplier,
        subproblem_residual: residual.max(radial),
        unique,
    })
}

/// Solves the secular equation `||p(s)|| = t` with
/// `p(s)_i = sigma_i y_i / (sigma_i + s)` for `s >= lambda`, where `y` is `x`
/// in the eigenbasis. Returns the point, the multiplier `s - lambda` and the
/// residual of the scalar solve.
fn quadratic_boundary(
    qf: &QuadraticForm,
    x: &[f64],
    lambda: f64,
    t: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let eig = qf.eigen();
    let y = eig.to_eigenbasis(x);
    let sy: Vec<(f64, f64)> = eig
        .values
        .iter()
        .zip(&y)
        .filter(|(s, _)| **s > 0.0)
        .map(|(s, yi)| (*s, *yi))
        .collect();
    let p_norm = |s: f64| {
        norm(
            &sy.iter()
                .map(|(sig, yi)| sig * yi / (sig + s))
                .collect::<Vec<_>>(),
        )
    };
    // h(s) = 1/||p(s)|| - 1/t is increasing, concave-ish and nearly linear.
    let h = |s: f64| {
        let pn = p_norm(s);
        let dn: f64 = sy
            .iter()
            .map(|(sig, yi)| sig * sig * yi * yi / (sig + s).powi(3))
            .sum();
        (1.0 / pn - 1.0 / t, dn / pn.powi(3))
    };
    let qy = norm(&sy.iter().map(|(sig, yi)| sig * yi).collect::<Vec<_>>());
    let hi = (qy / t).max(lambda);
    let root = newton_bisect(
        h,
        lambda,
        hi,
        lambda,
        1e-15 / t,
        "trust-region secular equation",
    )?;
    let s = root.x;
    let w: Vec<f64> = eig
        .values
        .iter()
        .zip(&y)
        .map(|(sig, yi)| {
            if *sig > 0.0 {
                sig * yi / (sig + s)
            } else {
                0.0
            }
        })
        .collect();
    let step = eig.from_eigenbasis(&w);
    let z: Vec<f64> = x.iter().zip(&step).map(|(xi, pi)| xi - pi).collect();
    Ok((z, (s - lambda).max(0.0), root.residual * t))
}

/// Threshold `tau` with `sum_i min(|x_i|, tau)^2 = t^2`; requires `||x|| > t`.
fn l1_threshold(x: &[f64], t: f64) -> f64 {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let target = t * t;
    let mut below = 0.0;
    for (j, aj) in a.iter().enumerate() {
        // On [a_{j-1}, a_j]: below + (n - j) tau^2.
        let remaining = (n - j) as f64;
        if below + remaining * aj * aj >= target {
            return ((target - below) / remaining).max(0.0).sqrt();
        }
        below += aj * aj;
    }
    a[n - 1]
}
