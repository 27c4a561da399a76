use proptest::prelude::*;

use trppm::displacement::{lambda_star, phi, DisplacementQuery};
use trppm::linalg::dist;
use trppm::problem::{dist_to_solutions, make_problem, CatalogEntry, Problem};
use trppm::solver::{run, LambdaRule, SolverConfig};
use trppm::{brox, prox, prox_zero, tr_prox, SubproblemSpec, Vector};

fn gap(a: &Vector, b: &Vector) -> f64 {
    dist(a.as_slice(), b.as_slice())
}

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn rotated_quadratic(theta: f64, s1: f64, s2: f64) -> Problem {
    let (c, s) = (theta.cos(), theta.sin());
    make_problem(&CatalogEntry::Quadratic {
        q: vec![
            vec![s1 * c * c + s2 * s * s, (s1 - s2) * c * s],
            vec![(s1 - s2) * c * s, s1 * s * s + s2 * c * c],
        ],
    })
    .unwrap()
}

/// Any 2D catalog problem. The quartic is 1D and has its own test.
fn problem_2d() -> impl Strategy<Value = Problem> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|mu| make_problem(&CatalogEntry::ScaledAbs { mu, dim: 2 }).unwrap()),
        (0.0..std::f64::consts::PI, 0.1..3.0f64, 0.0..3.0f64)
            .prop_map(|(th, a, b)| rotated_quadratic(th, a, b)),
        (0.1..2.0f64, 0.1..2.0f64).prop_map(|(a, b)| {
            make_problem(&CatalogEntry::IndicatorBox {
                lower: vec![-a, -b],
                upper: vec![a, b],
            })
            .unwrap()
        }),
        (-1.0..1.0f64, 0.2..2.0f64).prop_map(|(c, r)| {
            make_problem(&CatalogEntry::IndicatorBall {
                center: vec![c, -c],
                radius: r,
            })
            .unwrap()
        }),
        (0.1..3.0f64)
            .prop_map(|alpha| make_problem(&CatalogEntry::SharpNorm { alpha, dim: 2 }).unwrap()),
    ]
}

/// Problems with finite objective everywhere, so displacement bisection applies.
fn finite_problem_2d() -> impl Strategy<Value = Problem> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|mu| make_problem(&CatalogEntry::ScaledAbs { mu, dim: 2 }).unwrap()),
        (0.0..std::f64::consts::PI, 0.1..3.0f64, 0.0..3.0f64)
            .prop_map(|(th, a, b)| rotated_quadratic(th, a, b)),
        (0.1..3.0f64)
            .prop_map(|alpha| make_problem(&CatalogEntry::SharpNorm { alpha, dim: 2 }).unwrap()),
    ]
}

fn point() -> impl Strategy<Value = Vector> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| v(&[a, b]))
}

fn lambda() -> impl Strategy<Value = f64> {
    (-2.0..1.5f64).prop_map(|e| 10f64.powf(e))
}

/// Two-level polar grid over the ball of radius `t` around `x`; returns the best point.
fn grid_minimizer(p: &Problem, x: &Vector, lambda: f64, t: f64) -> (Vector, f64) {
    let obj = |z: &Vector| {
        let d = gap(z, x);
        p.value(z).unwrap() + 0.5 * lambda * d * d
    };
    let at = |r: f64, a: f64| v(&[x[0] + r * a.cos(), x[1] + r * a.sin()]);
    let (nr, na) = (200, 720);
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..=nr {
        let r = t * i as f64 / nr as f64;
        for j in 0..na {
            let a = std::f64::consts::TAU * j as f64 / na as f64;
            let f = obj(&at(r, a));
            if f < best.2 {
                best = (r, a, f);
            }
        }
    }
    let (dr, da) = (t / nr as f64, std::f64::consts::TAU / na as f64);
    let (r0, a0) = (best.0, best.1);
    for i in -50..=50 {
        let r = (r0 + dr * i as f64 / 25.0).clamp(0.0, t);
        for j in -50..=50 {
            let a = a0 + da * j as f64 / 25.0;
            let f = obj(&at(r, a));
            if f < best.2 {
                best = (r, a, f);
            }
        }
    }
    (at(best.0, best.1), best.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prox_is_nonexpansive(p in problem_2d(), x in point(), y in point(), l in lambda()) {
        let px = prox(&p, l, &x).unwrap();
        let py = prox(&p, l, &y).unwrap();
        prop_assert!(gap(&px, &py) <= gap(&x, &y) * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn projection_is_idempotent(p in problem_2d(), x in point()) {
        let once = prox_zero(&p, &x).unwrap();
        let twice = prox_zero(&p, &once).unwrap();
        prop_assert!(gap(&once, &twice) <= 1e-12);
        prop_assert!((dist_to_solutions(&p, &x).unwrap() - gap(&x, &once)).abs() <= 1e-12);
    }

    #[test]
    fn tr_prox_stays_in_ball_and_reports_activity(
        p in problem_2d(), x in point(), l in lambda(), t in 0.05..4.0f64,
    ) {
        let r = tr_prox(&SubproblemSpec::new(&p, &x, l, t)).unwrap();
        let step = gap(&r.point, &x);
        prop_assert!(step <= t * (1.0 + 1e-9));
        if r.active {
            prop_assert!((step - t).abs() <= 1e-8 * t.max(1.0));
        } else {
            prop_assert_eq!(r.multiplier, Some(0.0));
            prop_assert!(gap(&r.point, &prox(&p, l, &x).unwrap()) <= 1e-12);
        }
        if let Some(c) = r.multiplier {
            prop_assert!(c >= -1e-9);
        }
        let d = step;
        let value = p.value(&r.point).unwrap() + 0.5 * l * d * d;
        if value.is_finite() {
            prop_assert!((value - r.objective_at_point).abs() <= 1e-9 * value.abs().max(1.0));
        } else {
            // Ball misses the feasible set; the step heads toward it.
            prop_assert!(r.active && r.objective_at_point == f64::INFINITY);
        }
    }

    #[test]
    fn tr_prox_descends(p in problem_2d(), x in point(), l in lambda(), t in 0.05..4.0f64) {
        let r = tr_prox(&SubproblemSpec::new(&p, &x, l, t)).unwrap();
        let fx = p.value(&x).unwrap();
        prop_assert!(p.value(&r.point).unwrap() <= fx + 1e-9 * fx.abs().max(1.0));
    }

    #[test]
    fn brox_is_within_radius_and_no_worse_than_center(p in problem_2d(), x in point(), t in 0.05..4.0f64) {
        let r = brox(&p, &x, t).unwrap();
        prop_assert!(gap(&r.point, &x) <= t * (1.0 + 1e-9));
        let fx = p.value(&x).unwrap();
        prop_assert!(p.value(&r.point).unwrap() <= fx + 1e-9 * fx.abs().max(1.0));
    }

    #[test]
    fn displacement_is_bounded_monotone_and_lipschitz(
        p in problem_2d(), x in point(), l1 in lambda(), l2 in lambda(), y in point(),
    ) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let d = dist_to_solutions(&p, &x).unwrap();
        let phi_at = |z: &Vector, l: f64| phi(&DisplacementQuery { problem: &p, x: z, lambda: l }).unwrap();
        let (a, b) = (phi_at(&x, lo), phi_at(&x, hi));
        prop_assert!(a <= d + 1e-9 && b >= -1e-12);
        prop_assert!(b <= a + 1e-9);
        prop_assert!((phi_at(&x, lo) - phi_at(&y, lo)).abs() <= 2.0 * gap(&x, &y) + 1e-9);
    }

    #[test]
    fn lambda_star_keeps_displacement_at_least_radius(p in finite_problem_2d(), x in point(), frac in 0.05..0.95f64) {
        let d = dist_to_solutions(&p, &x).unwrap();
        prop_assume!(d > 1e-3);
        let t = frac * d;
        let l = lambda_star(&p, &x, t, 1e-10).unwrap();
        let at = phi(&DisplacementQuery { problem: &p, x: &x, lambda: l }).unwrap();
        prop_assert!(at >= t * (1.0 - 1e-9), "phi {at} < t {t}");
        let r = tr_prox(&SubproblemSpec::new(&p, &x, l, t)).unwrap();
        prop_assert!(r.active);
    }

    #[test]
    fn fixed_t_trace_is_fejer_and_descending(p in finite_problem_2d(), x in point(), t in 0.1..2.0f64) {
        let trace = run(&p, &x, &SolverConfig::fixed_t(t, LambdaRule::Bisection, 500)).unwrap();
        for w in trace.records.windows(2) {
            prop_assert!(w[1].f_gap <= w[0].f_gap + 1e-9 * w[0].f_gap.max(1.0));
            prop_assert!(w[1].dist <= w[0].dist + 1e-9);
        }
        let n = trace.records.len();
        for r in &trace.records[..n - 1] {
            prop_assert!(r.f_gap <= r.envelope * (1.0 + 1e-7) + 1e-12);
        }
    }

    #[test]
    fn quartic_tr_prox_matches_scalar_grid(x in -10.0..10.0f64, l in lambda(), t in 0.05..3.0f64) {
        let p = make_problem(&CatalogEntry::Quartic1D).unwrap();
        let c = v(&[x]);
        let r = tr_prox(&SubproblemSpec::new(&p, &c, l, t)).unwrap();
        let obj = |z: f64| z.powi(4) / 4.0 + 0.5 * l * (z - x) * (z - x);
        let n = 200_000;
        let best = (0..=n)
            .map(|i| x - t + 2.0 * t * i as f64 / n as f64)
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap();
        prop_assert!(obj(r.point[0]) <= obj(best) + 1e-9 * obj(best).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadratic_boundary_solution_matches_polar_grid(
        th in 0.0..std::f64::consts::PI, s1 in 0.2..3.0f64, s2 in 0.0..3.0f64,
        x in point(), l in lambda(), t in 0.1..1.5f64,
    ) {
        let p = rotated_quadratic(th, s1, s2);
        let r = tr_prox(&SubproblemSpec::new(&p, &x, l, t)).unwrap();
        let (z, f) = grid_minimizer(&p, &x, l, t);
        prop_assert!(r.objective_at_point <= f + 1e-6 * f.abs().max(1.0));
        if r.unique {
            prop_assert!(gap(&r.point, &z) <= 1e-3, "{:?} vs {:?}", r.point, z);
        }
    }
}
