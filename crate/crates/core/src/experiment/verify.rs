//! Seeded property suites over the catalog: operator, displacement, rate and
//! equivalence invariants, each reduced to a worst-case measurement.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::displacement::{
    lambda_star_raw, m_f_closed_form, m_f_grid, phi_raw, weak_sharp_lambda_raw, MfQuery,
};
use crate::error::Error;
use crate::linalg::{dist, dot, Vector};
use crate::problem::{make_problem, CatalogEntry, Problem};
use crate::prox::{prox_raw, tr_prox_raw, ProxResult};
use crate::solver::{check_bpm_equivalence, run, LambdaRule, SolverConfig, Trace};

use super::checks;
use super::{CheckResult, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Operators,
    Displacement,
    Rates,
    Equivalence,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] =
        ["operators", "displacement", "rates", "equivalence", "all"];
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "operators" => Suite::Operators,
            "displacement" => Suite::Displacement,
            "rates" => Suite::Rates,
            "equivalence" => Suite::Equivalence,
            "all" => Suite::All,
            _ => {
                return Err(format!(
                    "unknown suite `{s}` (expected one of: {})",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}

/// Runs a suite deterministically from `seed`.
pub fn verify_suite(suite: Suite, seed: u64) -> VerificationReport {
    let mut checks = Vec::new();
    let run_suite = |s: Suite, out: &mut Vec<CheckResult>| {
        // Each suite draws from its own stream so that suites compose.
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        out.extend(match s {
            Suite::Operators => operators(&mut rng),
            Suite::Displacement => displacement(&mut rng),
            Suite::Rates => rates(&mut rng),
            Suite::Equivalence => equivalence(&mut rng),
            Suite::All => unreachable!(),
        });
    };
    match suite {
        Suite::All => {
            for s in [
                Suite::Operators,
                Suite::Displacement,
                Suite::Rates,
                Suite::Equivalence,
            ] {
                run_suite(s, &mut checks);
            }
        }
        s => run_suite(s, &mut checks),
    }
    VerificationReport::new(checks)
}

/// Running maximum of a violation measure.
struct Worst {
    name: &'static str,
    bound: f64,
    tol: f64,
    value: f64,
    detail: String,
    error: Option<String>,
}

impl Worst {
    fn new(name: &'static str, bound: f64, tol: f64) -> Self {
        Worst {
            name,
            bound,
            tol,
            value: f64::NEG_INFINITY,
            detail: String::new(),
            error: None,
        }
    }

    fn observe(&mut self, v: f64, context: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = if v.is_nan() { f64::INFINITY } else { v };
            self.detail = context();
        }
    }

    fn fail(&mut self, e: Error, context: &str) {
        if self.error.is_none() {
            self.error = Some(format!("{context}: {e}"));
        }
    }

    fn finish(self) -> CheckResult {
        if let Some(e) = self.error {
            return CheckResult::failed(self.name, e);
        }
        let value = if self.value == f64::NEG_INFINITY {
            self.bound
        } else {
            self.value
        };
        CheckResult::at_most(self.name, value, self.bound, self.tol, self.detail)
    }
}

/// The problems every suite runs over; quadratics are drawn from `rng`.
pub fn catalog(rng: &mut ChaCha8Rng) -> Vec<Problem> {
    let mut entries = vec![
        CatalogEntry::Quartic1D,
        CatalogEntry::ScaledAbs { mu: 1.0, dim: 1 },
        CatalogEntry::ScaledAbs { mu: 0.7, dim: 3 },
        CatalogEntry::Quadratic {
            q: vec![vec![2.0, 0.0], vec![0.0, 0.0]],
        },
        CatalogEntry::IndicatorBox {
            lower: vec![-1.0, -0.5],
            upper: vec![1.0, 2.0],
        },
        CatalogEntry::IndicatorBall {
            center: vec![1.0, -1.0],
            radius: 1.5,
        },
        CatalogEntry::SharpNorm { alpha: 2.0, dim: 2 },
    ];
    entries.push(CatalogEntry::Quadratic {
        q: random_psd(rng, 2, 2, 0.1),
    });
    entries.push(CatalogEntry::Quadratic {
        q: random_psd(rng, 3, 2, 0.0),
    });
    entries
        .iter()
        .map(|e| make_problem(e).expect("catalog entries are valid"))
        .collect()
}

/// `A A^T + shift I` with `A` an `n x rank` matrix of uniform entries.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize, shift: f64) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..rank).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| dot(&a[i], &a[j]) + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Uniform point in the closed ball `B_t(x)`.
fn random_in_ball(rng: &mut ChaCha8Rng, x: &[f64], t: f64) -> Vec<f64> {
    loop {
        let u = random_point(rng, x.len(), 1.0);
        let n = crate::linalg::norm(&u);
        if n <= 1.0 {
            return x.iter().zip(&u).map(|(xi, ui)| xi + t * ui).collect();
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn label(p: &Problem, x: &[f64]) -> String {
    format!("{} at {:?}", p.name(), x)
}

fn operators(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let problems = catalog(rng);
    let mut nonexp = Worst::new("nonexpansive", 0.0, 1e-9);
    let mut optimal = Worst::new("subproblem_optimality", 0.0, 1e-7);
    let mut boundary = Worst::new("boundary", 0.0, 1e-8);
    let mut invariants = Worst::new("prox_result_invariants", 0.0, 1e-8);
    let mut certificate = Worst::new("descent_certificate", 0.0, 1e-6);
    let mut gradient = Worst::new("multiplier_gradient", 0.0, 1e-6);

    for p in &problems {
        let d = p.dim();
        for lambda in [0.1, 1.0, 10.0] {
            for _ in 0..100 {
                let x = random_point(rng, d, 5.0);
                let y = random_point(rng, d, 5.0);
                match (prox_raw(p, lambda, &x), prox_raw(p, lambda, &y)) {
                    (Ok((px, _)), Ok((py, _))) => {
                        nonexp.observe(dist(&px, &py) - dist(&x, &y), || label(p, &x));
                    }
                    (Err(e), _) | (_, Err(e)) => nonexp.fail(e, p.name()),
                }
            }
        }

        for _ in 0..40 {
            let x = random_point(rng, d, 5.0);
            let lambda = [0.0, 0.1, 1.0, 10.0][rng.random_range(0..4)];
            let t = rng.random_range(0.1..3.0);
            let r = match tr_prox_raw(p, &x, lambda, t) {
                Ok(r) => r,
                Err(e) => {
                    optimal.fail(e, p.name());
                    continue;
                }
            };
            observe_invariants(&mut invariants, p, &x, t, &r);

            let obj = |z: &[f64]| {
                let dz = dist(z, &x);
                p.eval(z)
                    + if lambda > 0.0 {
                        0.5 * lambda * dz * dz
                    } else {
                        0.0
                    }
            };
            for _ in 0..64 {
                let z = random_in_ball(rng, &x, t);
                let oz = obj(&z);
                if r.objective_at_point.is_infinite() && oz.is_infinite() {
                    continue;
                }
                optimal.observe(r.objective_at_point - oz, || label(p, &x));
            }

            if let Some(c) = r.multiplier {
                let u = r.point.as_slice();
                let scale = c + lambda;
                let fu = p.eval(u);
                for _ in 0..64 {
                    let y = random_point(rng, d, 6.0);
                    let fy = p.eval(&y);
                    if fy.is_infinite() {
                        continue;
                    }
                    let xu: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - b).collect();
                    let yu: Vec<f64> = y.iter().zip(u).map(|(a, b)| a - b).collect();
                    certificate.observe(scale * dot(&xu, &yu) - (fy - fu), || label(p, &x));
                }
                if let Some(g) = p.gradient(u) {
                    let resid: Vec<f64> = g
                        .iter()
                        .zip(x.iter().zip(u))
                        .map(|(gi, (xi, ui))| gi - scale * (xi - ui))
                        .collect();
                    gradient.observe(crate::linalg::norm(&resid), || label(p, &x));
                }
            }

            // Broximal steps from outside the t-neighborhood land on the sphere.
            if p.dist(&x) > t {
                match tr_prox_raw(p, &x, 0.0, t) {
                    Ok(b) => {
                        boundary.observe((dist(b.point.as_slice(), &x) - t).abs(), || label(p, &x))
                    }
                    Err(e) => boundary.fail(e, p.name()),
                }
            }
        }
    }
    vec![
        nonexp.finish(),
        optimal.finish(),
        boundary.finish(),
        invariants.finish(),
        certificate.finish(),
        gradient.finish(),
    ]
}

fn observe_invariants(w: &mut Worst, p: &Problem, x: &[f64], t: f64, r: &ProxResult) {
    let step = dist(r.point.as_slice(), x);
    let v = if r.active {
        (step - t).abs() / t.max(1.0)
    } else {
        let excess = (step - t).max(0.0);
        let mult = r.multiplier.map(f64::abs).unwrap_or(f64::INFINITY);
        excess.max(mult)
    };
    let v = match r.multiplier {
        Some(c) if c < 0.0 => v.max(-c),
        _ => v,
    };
    w.observe(v, || label(p, x));
}

fn displacement(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let problems = catalog(rng);
    let mut range = Worst::new("phi_range", 0.0, 1e-12);
    let mut mono = Worst::new("phi_monotone", 0.0, 1e-9);
    let mut limits = Worst::new("phi_limits", 0.0, 1e-4);
    let mut lipschitz = Worst::new("phi_lipschitz", 0.0, 1e-9);
    let mut mf_mono = Worst::new("m_f_monotone", 0.0, 0.0);
    let mut mf_pos = Worst::new("m_f_positive", 0.0, 0.0);
    let mut star = Worst::new("lambda_star_admissible", 0.0, 1e-6);
    let mut sharp = Worst::new("weak_sharp_admissible", 0.0, 1e-6);

    let grid: Vec<f64> = (0..50)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0))
        .collect();
    for p in &problems {
        let d = p.dim();
        for _ in 0..20 {
            let x = random_point(rng, d, 5.0);
            let dx = p.dist(&x);
            let mut prev = f64::INFINITY;
            for &lambda in &grid {
                match phi_raw(p, lambda, &x) {
                    Ok(phi) => {
                        range.observe((-phi).max(phi - dx), || label(p, &x));
                        mono.observe(phi - prev, || format!("{} lambda = {lambda}", label(p, &x)));
                        prev = phi;
                    }
                    Err(e) => range.fail(e, p.name()),
                }
            }

            // Limits are taken at points of the domain near the solution set:
            // for the quartic the small-lambda gap is about (lambda |x|)^(1/3).
            let xs: Vec<f64> = x.iter().map(|v| v / 10.0).collect();
            let xd = if p.is_indicator() {
                p.project(&xs)
            } else {
                p.project(&x).iter().zip(&xs).map(|(a, b)| a + b).collect()
            };
            let far = phi_raw(p, 1e12, &xd);
            let near = phi_raw(p, 1e-12, &xd);
            match (far, near) {
                (Ok(f), Ok(n)) => limits.observe(f.max((n - p.dist(&xd)).abs()), || label(p, &xd)),
                (Err(e), _) | (_, Err(e)) => limits.fail(e, p.name()),
            }

            let lambda = log_uniform(rng, 1e-2, 1e2);
            let y: Vec<f64> = if rng.random_bool(0.5) {
                x.iter().map(|v| v + rng.random_range(-0.1..0.1)).collect()
            } else {
                random_point(rng, d, 5.0)
            };
            match (phi_raw(p, lambda, &x), phi_raw(p, lambda, &y)) {
                (Ok(a), Ok(b)) => {
                    lipschitz.observe((a - b).abs() - 2.0 * dist(&x, &y), || label(p, &x))
                }
                (Err(e), _) | (_, Err(e)) => lipschitz.fail(e, p.name()),
            }
        }

        // Uniform bound: closed forms where known, sampled otherwise.
        let x0 = Vector::from_vec(vec![3.0; d]);
        let eps_grid = [0.2, 0.5, 1.0];
        let lam_grid = [0.0, 0.5, 2.0, 8.0];
        let closed = m_f_closed_form(p, 1.0, 1.0).is_ok();
        let value = |eps: f64, lambda: f64| -> Result<f64, Error> {
            if closed {
                m_f_closed_form(p, eps, lambda)
            } else {
                m_f_grid(&MfQuery::new(p, &x0, eps, lambda)?, 2000)
            }
        };
        let mut table = vec![vec![0.0; lam_grid.len()]; eps_grid.len()];
        for (i, &eps) in eps_grid.iter().enumerate() {
            for (j, &lambda) in lam_grid.iter().enumerate() {
                match value(eps, lambda) {
                    Ok(m) => {
                        table[i][j] = m;
                        mf_pos.observe(if m > 0.0 { 0.0 } else { 1.0 }, || {
                            format!("{} eps {eps} lambda {lambda}", p.name())
                        });
                    }
                    Err(e) => mf_pos.fail(e, p.name()),
                }
            }
        }
        for i in 0..eps_grid.len() {
            for j in 0..lam_grid.len() {
                if j + 1 < lam_grid.len() {
                    mf_mono.observe(table[i][j + 1] - table[i][j], || {
                        format!("{} in lambda", p.name())
                    });
                }
                if i + 1 < eps_grid.len() {
                    mf_mono.observe(table[i][j] - table[i + 1][j], || {
                        format!("{} in epsilon", p.name())
                    });
                }
            }
        }
    }

    let finite_gap: Vec<&Problem> = problems.iter().filter(|p| !p.is_indicator()).collect();
    let mut drawn = 0;
    while drawn < 100 {
        let p = finite_gap[rng.random_range(0..finite_gap.len())];
        let x = random_point(rng, p.dim(), 5.0);
        let dx = p.dist(&x);
        if dx < 0.2 {
            continue;
        }
        let t = rng.random_range(0.05..0.95) * dx;
        drawn += 1;
        match lambda_star_raw(p, &x, t, 1e-10).and_then(|l| phi_raw(p, l, &x)) {
            Ok(phi) => star.observe(t - phi, || format!("{} t = {t}", label(p, &x))),
            Err(e) => star.fail(e, p.name()),
        }
        if p.weak_sharp().is_some() {
            match weak_sharp_lambda_raw(p, &x, t).and_then(|l| phi_raw(p, l, &x)) {
                Ok(phi) => sharp.observe(t - phi, || format!("{} t = {t}", label(p, &x))),
                Err(e) => sharp.fail(e, p.name()),
            }
        }
    }

    vec![
        range.finish(),
        mono.finish(),
        limits.finish(),
        lipschitz.finish(),
        mf_mono.finish(),
        mf_pos.finish(),
        star.finish(),
        sharp.finish(),
    ]
}

fn rates(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let problems = catalog(rng);
    let smooth: Vec<&Problem> = problems.iter().filter(|p| !p.is_indicator()).collect();
    let mut traces: Vec<(String, &Problem, Trace)> = Vec::new();
    let mut errors = Vec::new();
    let mut push = |name: String, p: &'static str, r: crate::error::Result<Trace>, problem| match r
    {
        Ok(t) => traces.push((name, problem, t)),
        Err(e) => errors.push(format!("{p}: {e}")),
    };

    for p in &smooth {
        let d = p.dim();
        let mut x0 = random_point(rng, d, 5.0);
        if p.dist(&x0) < 1.0 {
            x0.iter_mut().for_each(|v| *v = v.signum() * 4.0);
        }
        let x0 = Vector::from_vec(x0);
        let d0 = p.dist(x0.as_slice());
        let t = 0.1 * d0;
        push(
            format!("{} ppm", p.name()),
            p.name(),
            run(p, &x0, &SolverConfig::ppm(1.0, 200)),
            *p,
        );
        push(
            format!("{} bpm", p.name()),
            p.name(),
            run(p, &x0, &SolverConfig::bpm(t, 500)),
            *p,
        );
        push(
            format!("{} fixed_t bisection", p.name()),
            p.name(),
            run(
                p,
                &x0,
                &SolverConfig::fixed_t(t, LambdaRule::Bisection, 500),
            ),
            *p,
        );
        if p.weak_sharp().is_some() {
            push(
                format!("{} fixed_t weak_sharp", p.name()),
                p.name(),
                run(
                    p,
                    &x0,
                    &SolverConfig::fixed_t(t, LambdaRule::WeakSharp, 500),
                ),
                *p,
            );
        }
        if m_f_closed_form(p, 0.1 * d0, 1.0).is_ok() || p.dim() == 1 {
            push(
                format!("{} fixed_lambda", p.name()),
                p.name(),
                run(
                    p,
                    &x0,
                    &SolverConfig::fixed_lambda(1.0, 0.1 * d0, 0.8, 2000),
                ),
                *p,
            );
        }
        if p.strong_convexity().is_some() {
            for t in [f64::INFINITY, 0.05 * d0] {
                push(
                    format!("{} unconstrained t = {t}", p.name()),
                    p.name(),
                    run(p, &x0, &SolverConfig::unconstrained(2.0, t, 200)),
                    *p,
                );
            }
        }
    }

    let mut out = Vec::new();
    let collect = |name: &'static str,
                   tol: f64,
                   applies: &dyn Fn(&Trace) -> bool,
                   f: &dyn Fn(&Problem, &Trace) -> CheckResult| {
        let mut w = Worst::new(name, 0.0, tol);
        for (label, p, t) in traces.iter().filter(|(_, _, t)| applies(t)) {
            let c = f(p, t);
            w.observe(c.measured - c.bound, || label.clone());
        }
        w.finish()
    };
    use crate::solver::Regime::*;
    out.push(collect(
        "ppm_step_monotone",
        1e-9,
        &|t| t.config.regime == Ppm,
        &|_, t| checks::step_monotone(t, 0.0),
    ));
    out.push(collect("fejer", 1e-9, &|_| true, &|_, t| {
        checks::non_increasing_dist(t)
    }));
    out.push(collect("descent", 1e-9, &|_| true, &|_, t| {
        checks::non_increasing_gap(t)
    }));
    out.push(collect("q_descent", 1e-9, &|_| true, &|_, t| {
        checks::q_descent(t, 0.0)
    }));
    out.push(collect(
        "envelope",
        1e-7,
        &|t| {
            matches!(
                t.config.regime,
                TrppmFixedT | Bpm | TrppmFixedLambda | TrppmUnconstrained
            )
        },
        &|_, t| checks::envelope(t, 0.0),
    ));
    out.push(collect(
        "active_step",
        1e-6,
        &|t| matches!(t.config.regime, TrppmFixedT | Bpm),
        &|_, t| checks::active_step(t, 0.0),
    ));
    out.push(collect(
        "admissible_lambda",
        1e-6,
        &|t| t.config.regime == TrppmFixedT,
        &|p, t| checks::admissible_lambda(p, t, 0.0),
    ));
    out.push(collect(
        "contraction",
        1e-9,
        &|t| matches!(t.config.regime, TrppmFixedLambda | TrppmUnconstrained),
        &|p, t| checks::contraction(p, t, 0.0),
    ));

    // Regime identities on a fresh pair of runs per smooth problem.
    let mut ppm_id = Worst::new("ppm_identity", 0.0, 0.0);
    let mut bpm_id = Worst::new("bpm_identity", 0.0, 1e-10);
    for p in &smooth {
        let x0 = Vector::from_vec(vec![3.5; p.dim()]);
        let t = 0.2;
        let pairs = (
            run(p, &x0, &SolverConfig::ppm(0.7, 50)),
            run(p, &x0, &SolverConfig::unconstrained(0.7, f64::INFINITY, 50)),
            run(p, &x0, &SolverConfig::bpm(t, 100)),
            run(
                p,
                &x0,
                &SolverConfig {
                    lambda: 0.0,
                    ..SolverConfig::fixed_t(t, LambdaRule::Constant, 100)
                },
            ),
        );
        match pairs {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => {
                let same = a.records.len() == b.records.len()
                    && a.records.iter().zip(&b.records).all(|(r, s)| r.x == s.x);
                ppm_id.observe(if same { 0.0 } else { 1.0 }, || p.name().to_string());
                if c.records.len() != d.records.len() {
                    bpm_id.observe(f64::INFINITY, || {
                        format!("{}: trace lengths differ", p.name())
                    });
                }
                for (r, s) in c.records.iter().zip(&d.records) {
                    bpm_id.observe(dist(r.x.as_slice(), s.x.as_slice()), || {
                        p.name().to_string()
                    });
                }
            }
            (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (.., Err(e)) => {
                ppm_id.fail(e, p.name())
            }
        }
    }
    out.push(ppm_id.finish());
    out.push(bpm_id.finish());

    if !errors.is_empty() {
        out.push(CheckResult::failed("rate_runs", errors.join("; ")));
    }
    out
}

/// A random 2D quadratic instance with both the proximal point and the
/// solution set outside the trust region.
pub fn random_equivalence_instance(rng: &mut ChaCha8Rng) -> (Problem, Vector, f64, f64) {
    loop {
        let th: f64 = rng.random_range(0.0..TAU);
        let (c, s) = (th.cos(), th.sin());
        let s1 = rng.random_range(0.2..3.0);
        let s2 = if rng.random_bool(0.25) {
            0.0
        } else {
            rng.random_range(0.1..3.0)
        };
        let q = vec![
            vec![s1 * c * c + s2 * s * s, (s1 - s2) * c * s],
            vec![(s1 - s2) * c * s, s1 * s * s + s2 * c * c],
        ];
        let Ok(p) = make_problem(&CatalogEntry::Quadratic { q }) else {
            continue;
        };
        let r = rng.random_range(2.0..8.0);
        let a: f64 = rng.random_range(0.0..TAU);
        let x = vec![r * a.cos(), r * a.sin()];
        let t = rng.random_range(0.1..1.0);
        let lambda = log_uniform(rng, 1e-2, 2.0);
        let ok = p.dist(&x) > t && phi_raw(&p, lambda, &x).map(|phi| phi > t).unwrap_or(false);
        if ok {
            return (p, Vector::from_vec(x), lambda, t);
        }
    }
}

fn equivalence(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let mut w = Worst::new("bpm_trppm_equivalence", 0.0, crate::solver::EQUIVALENCE_TOL);
    for i in 0..20 {
        let (p, x, lambda, t) = random_equivalence_instance(rng);
        match check_bpm_equivalence(&p, &x, lambda, t) {
            Ok(e) => w.observe(e.discrepancy, || {
                format!(
                    "instance {i}: x = {:?}, lambda = {lambda}, t = {t}",
                    x.as_slice()
                )
            }),
            Err(e) => w.fail(e, "equivalence instance"),
        }
    }
    vec![w.finish()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for n in Suite::NAMES {
            assert!(n.parse::<Suite>().is_ok());
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn equivalence_suite_passes() {
        let r = verify_suite(Suite::Equivalence, 42);
        assert!(r.passed, "{}", r.summary());
    }
}
