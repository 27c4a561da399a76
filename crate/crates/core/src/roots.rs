//! Safeguarded Newton iteration with bisection fallback for bracketed scalar roots.

use crate::error::{Error, Result};

/// Iteration cap shared by every inner scalar solve.
pub const MAX_INNER_ITERS: usize = 200;

/// A converged scalar root together with its final residual.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub residual: f64,
}

/// Solves `g(x) = 0` on `[lo, hi]` where `g(lo)` and `g(hi)` have opposite
/// signs (or one of them is zero). `g` returns `(value, derivative)`.
///
/// Newton steps that leave the current bracket, or that fail to halve the
/// residual, are replaced by bisection. Converges when `|g(x)| <= f_tol` or
/// the bracket shrinks below a few ulps of `x`.
pub(crate) fn newton_bisect<G>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    f_tol: f64,
    context: &'static str,
) -> Result<Root>
where
    G: FnMut(f64) -> (f64, f64),
{
    let (g_lo, _) = g(lo);
    if g_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
        });
    }
    let (g_hi, _) = g(hi);
    if g_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
        });
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NumericalFailure {
            context,
            residual: g_lo.abs().min(g_hi.abs()),
        });
    }
    // Orient so that g(lo) < 0 < g(hi).
    let increasing = g_lo < 0.0;

    let mut x = if start > lo.min(hi) && start < lo.max(hi) {
        start
    } else {
        0.5 * (lo + hi)
    };
    let mut prev_abs = f64::INFINITY;
    let mut last = f64::INFINITY;

    for _ in 0..MAX_INNER_ITERS {
        let (gx, dgx) = g(x);
        last = gx.abs();
        if last <= f_tol {
            return Ok(Root { x, residual: last });
        }
        if (gx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let width = (hi - lo).abs();
        if width <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(Root { x, residual: last });
        }

        let step = if dgx != 0.0 && dgx.is_finite() {
            gx / dgx
        } else {
            f64::NAN
        };
        if step.abs() <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(Root { x, residual: last });
        }
        let newton = x - step;
        let inside = newton > lo.min(hi) && newton < lo.max(hi);
        let accept = inside && (prev_abs.is_infinite() || last < 0.5 * prev_abs);
        x = if accept { newton } else { 0.5 * (lo + hi) };
        prev_abs = last;
    }
    Err(Error::NumericalFailure {
        context,
        residual: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        // z^3 + z - 2 = 0 has the single real root z = 1.
        let r = newton_bisect(
            |z| (z * z * z + z - 2.0, 3.0 * z * z + 1.0),
            0.0,
            2.0,
            2.0,
            1e-14,
            "t",
        )
        .unwrap();
        assert!((r.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decreasing_function() {
        let r = newton_bisect(
            |s| (1.0 / (1.0 + s) - 0.25, -1.0 / ((1.0 + s) * (1.0 + s))),
            0.0,
            10.0,
            0.0,
            1e-15,
            "t",
        )
        .unwrap();
        assert!((r.x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        let e = newton_bisect(|z| (z * z + 1.0, 2.0 * z), -1.0, 1.0, 0.0, 1e-12, "t").unwrap_err();
        assert!(matches!(e, Error::NumericalFailure { .. }));
    }

    #[test]
    fn survives_bad_derivative() {
        // Flat derivative at the start point forces bisection.
        let r = newton_bisect(|z| (z.powi(3) - 0.125, 0.0), 0.0, 1.0, 0.3, 1e-14, "t").unwrap();
        assert!((r.x - 0.5).abs() < 1e-9);
    }
}
