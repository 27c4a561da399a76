//! Catalog of convex test problems with exact ground truth.
//!
//! Every entry carries its optimal value, an exact Euclidean projection onto
//! its minimizer set, and (where it holds) weak-sharp and strong-convexity
//! constants, so that convergence bounds can be checked against exact values
//! rather than estimates.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    check_dims, dist, eigendecompose, norm, Matrix, SymmetricEigen, Vector, POSITIVITY_THRESHOLD,
    PSD_TOLERANCE,
};

/// Relative slack used when testing membership of a point in a constraint set.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// `f(x) - f_inf >= alpha * dist(x, X*)^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakSharp {
    pub alpha: f64,
    pub order: f64,
}

/// `f(x) = 1/2 x^T Q x` with its spectral decomposition cached.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    matrix: Matrix,
    eigen: SymmetricEigen,
}

impl QuadraticForm {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let mut eigen = eigendecompose(&matrix)?;
        for v in eigen.values.iter_mut() {
            if *v < -PSD_TOLERANCE {
                return Err(Error::NotPsd(*v));
            }
            if *v <= POSITIVITY_THRESHOLD {
                *v = 0.0;
            }
        }
        Ok(QuadraticForm { matrix, eigen })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eigen
    }

    /// Smallest positive eigenvalue, `None` for the zero matrix.
    pub fn sigma_plus(&self) -> Option<f64> {
        self.eigen.smallest_positive()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let y = self.eigen.to_eigenbasis(x);
        0.5 * self
            .eigen
            .values
            .iter()
            .zip(&y)
            .map(|(s, yi)| s * yi * yi)
            .sum::<f64>()
    }

    pub(crate) fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = self.eigen.to_eigenbasis(x);
        let sy: Vec<f64> = self
            .eigen
            .values
            .iter()
            .zip(&y)
            .map(|(s, yi)| s * yi)
            .collect();
        self.eigen.from_eigenbasis(&sy)
    }

    /// Projection onto `ker Q`.
    fn project_kernel(&self, x: &[f64]) -> Vec<f64> {
        let y = self.eigen.to_eigenbasis(x);
        let kept: Vec<f64> = self
            .eigen
            .values
            .iter()
            .zip(&y)
            .map(|(s, yi)| if *s > 0.0 { 0.0 } else { *yi })
            .collect();
        self.eigen.from_eigenbasis(&kept)
    }

    fn dist_kernel(&self, x: &[f64]) -> f64 {
        let y = self.eigen.to_eigenbasis(x);
        let range: Vec<f64> = self
            .eigen
            .values
            .iter()
            .zip(&y)
            .filter(|(s, _)| **s > 0.0)
            .map(|(_, yi)| *yi)
            .collect();
        norm(&range)
    }
}

/// The objective families the laboratory knows how to solve exactly.
#[derive(Clone, Debug)]
pub enum Objective {
    /// `f(x) = x^4 / 4` on the real line.
    Quartic1D,
    /// `f(x) = mu * ||x||_1` (coordinatewise `mu |x_i|`).
    ScaledAbs { mu: f64 },
    /// `f(x) = 1/2 x^T Q x`, `Q` symmetric PSD.
    Quadratic(QuadraticForm),
    /// Indicator of the box `[lower, upper]`.
    IndicatorBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Indicator of the closed ball `B_radius(center)`.
    IndicatorBall { center: Vec<f64>, radius: f64 },
    /// `f(x) = alpha * ||x||_2`.
    SharpNorm { alpha: f64 },
}

/// A fully specified test problem. Immutable once built.
#[derive(Clone, Debug)]
pub struct Problem {
    name: &'static str,
    dim: usize,
    objective: Objective,
    f_inf: f64,
    weak_sharp: Option<WeakSharp>,
    strong_convexity: Option<f64>,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn f_inf(&self) -> f64 {
        self.f_inf
    }

    pub fn weak_sharp(&self) -> Option<WeakSharp> {
        self.weak_sharp
    }

    pub fn strong_convexity(&self) -> Option<f64> {
        self.strong_convexity
    }

    /// Every catalog entry has a closed-form (or exactly solvable) proximal map.
    pub fn has_exact_prox(&self) -> bool {
        true
    }

    pub fn is_indicator(&self) -> bool {
        matches!(
            self.objective,
            Objective::IndicatorBox { .. } | Objective::IndicatorBall { .. }
        )
    }

    pub fn solution_set_is_singleton(&self) -> bool {
        match &self.objective {
            Objective::Quartic1D | Objective::ScaledAbs { .. } | Objective::SharpNorm { .. } => {
                true
            }
            Objective::Quadratic(qf) => qf.eigen.values.iter().all(|s| *s > 0.0),
            Objective::IndicatorBox { lower, upper } => lower == upper,
            Objective::IndicatorBall { .. } => false,
        }
    }

    pub fn check_dim(&self, x: &Vector) -> Result<()> {
        check_dims(self.dim, x.dim())
    }

    /// `f(x)`, possibly `+inf` outside the domain.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval(x.as_slice()))
    }

    /// Projection onto the minimizer set.
    pub fn solution_projection(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(Vector::from_vec(self.project(x.as_slice())))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match &self.objective {
            Objective::Quartic1D => 0.25 * x[0].powi(4),
            Objective::ScaledAbs { mu } => mu * x.iter().map(|v| v.abs()).sum::<f64>(),
            Objective::Quadratic(qf) => qf.value(x),
            Objective::IndicatorBox { lower, upper } => {
                let inside = x.iter().zip(lower.iter().zip(upper)).all(|(v, (lo, hi))| {
                    *v >= lo - MEMBERSHIP_TOL * (1.0 + lo.abs())
                        && *v <= hi + MEMBERSHIP_TOL * (1.0 + hi.abs())
                });
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Objective::IndicatorBall { center, radius } => {
                if dist(x, center) <= radius * (1.0 + MEMBERSHIP_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Objective::SharpNorm { alpha } => alpha * norm(x),
        }
    }

    pub(crate) fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.objective {
            Objective::Quartic1D | Objective::ScaledAbs { .. } | Objective::SharpNorm { .. } => {
                vec![0.0; x.len()]
            }
            Objective::Quadratic(qf) => qf.project_kernel(x),
            Objective::IndicatorBox { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                .collect(),
            Objective::IndicatorBall { center, radius } => project_ball(x, center, *radius),
        }
    }

    pub(crate) fn dist(&self, x: &[f64]) -> f64 {
        match &self.objective {
            Objective::Quadratic(qf) => qf.dist_kernel(x),
            Objective::Quartic1D | Objective::ScaledAbs { .. } | Objective::SharpNorm { .. } => {
                norm(x)
            }
            _ => dist(x, &self.project(x)),
        }
    }

    /// Gradient for the differentiable catalog entries.
    pub(crate) fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.objective {
            Objective::Quartic1D => Some(vec![x[0].powi(3)]),
            Objective::Quadratic(qf) => Some(qf.gradient(x)),
            _ => None,
        }
    }

    /// Public gradient access; `None` where `f` is nonsmooth.
    pub fn gradient_at(&self, x: &Vector) -> Result<Option<Vector>> {
        self.check_dim(x)?;
        Ok(self.gradient(x.as_slice()).map(Vector::from_vec))
    }
}

pub(crate) fn project_ball(x: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d = dist(x, center);
    if d <= radius {
        return x.to_vec();
    }
    let s = radius / d;
    x.iter().zip(center).map(|(v, c)| c + s * (v - c)).collect()
}

/// `dist(x, X*)`.
pub fn dist_to_solutions(problem: &Problem, x: &Vector) -> Result<f64> {
    problem.check_dim(x)?;
    Ok(problem.dist(x.as_slice()))
}

/// Constructor parameters for a catalog problem.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogEntry {
    Quartic1D,
    ScaledAbs { mu: f64, dim: usize },
    Quadratic { q: Vec<Vec<f64>> },
    IndicatorBox { lower: Vec<f64>, upper: Vec<f64> },
    IndicatorBall { center: Vec<f64>, radius: f64 },
    SharpNorm { alpha: f64, dim: usize },
}

/// A parameter value in a catalog parameter map.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Number(f64),
    List(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// Reasons a name + parameter map does not describe a catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogError {
    UnknownName(String),
    UnknownKeys(Vec<String>),
    Missing(&'static str),
    WrongType {
        key: &'static str,
        expected: &'static str,
    },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::UnknownName(n) => write!(
                f,
                "unknown problem `{n}` (expected one of: {})",
                CatalogEntry::NAMES.join(", ")
            ),
            CatalogError::UnknownKeys(k) => write!(f, "unknown keys: {}", k.join(", ")),
            CatalogError::Missing(k) => write!(f, "missing key `{k}`"),
            CatalogError::WrongType { key, expected } => write!(f, "`{key}` must be {expected}"),
        }
    }
}

impl std::error::Error for CatalogError {}

impl CatalogEntry {
    pub const NAMES: [&'static str; 6] = [
        "quartic1d",
        "scaled_abs",
        "quadratic",
        "indicator_box",
        "indicator_ball",
        "sharp_norm",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogEntry::Quartic1D => "quartic1d",
            CatalogEntry::ScaledAbs { .. } => "scaled_abs",
            CatalogEntry::Quadratic { .. } => "quadratic",
            CatalogEntry::IndicatorBox { .. } => "indicator_box",
            CatalogEntry::IndicatorBall { .. } => "indicator_ball",
            CatalogEntry::SharpNorm { .. } => "sharp_norm",
        }
    }

    /// Resolves a catalog name and its parameter map. Unknown keys are rejected.
    pub fn from_params(
        name: &str,
        params: &BTreeMap<String, Param>,
    ) -> std::result::Result<Self, CatalogError> {
        let allowed: &[&str] = match name {
            "quartic1d" => &[],
            "scaled_abs" => &["mu", "dim"],
            "quadratic" => &["q"],
            "indicator_box" => &["lower", "upper"],
            "indicator_ball" => &["center", "radius"],
            "sharp_norm" => &["alpha", "dim"],
            other => return Err(CatalogError::UnknownName(other.to_string())),
        };
        let unknown: Vec<String> = params
            .keys()
            .filter(|k| !allowed.contains(&k.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(CatalogError::UnknownKeys(unknown));
        }

        let number = |key: &'static str, default: Option<f64>| match params.get(key) {
            Some(Param::Number(v)) => Ok(*v),
            Some(_) => Err(CatalogError::WrongType {
                key,
                expected: "a number",
            }),
            None => default.ok_or(CatalogError::Missing(key)),
        };
        let list = |key: &'static str| match params.get(key) {
            Some(Param::List(v)) => Ok(v.clone()),
            Some(_) => Err(CatalogError::WrongType {
                key,
                expected: "a list of numbers",
            }),
            None => Err(CatalogError::Missing(key)),
        };
        let dim = |key: &'static str| {
            let d = number(key, Some(1.0))?;
            if d >= 1.0 && d.fract() == 0.0 {
                Ok(d as usize)
            } else {
                Err(CatalogError::WrongType {
                    key,
                    expected: "a positive integer",
                })
            }
        };

        Ok(match name {
            "quartic1d" => CatalogEntry::Quartic1D,
            "scaled_abs" => CatalogEntry::ScaledAbs {
                mu: number("mu", Some(1.0))?,
                dim: dim("dim")?,
            },
            "quadratic" => match params.get("q") {
                Some(Param::Matrix(q)) => CatalogEntry::Quadratic { q: q.clone() },
                // A 1x1 matrix may be written as a bare number.
                Some(Param::Number(v)) => CatalogEntry::Quadratic { q: vec![vec![*v]] },
                Some(_) => {
                    return Err(CatalogError::WrongType {
                        key: "q",
                        expected: "a square matrix",
                    })
                }
                None => return Err(CatalogError::Missing("q")),
            },
            "indicator_box" => CatalogEntry::IndicatorBox {
                lower: list("lower")?,
                upper: list("upper")?,
            },
            "indicator_ball" => CatalogEntry::IndicatorBall {
                center: list("center")?,
                radius: number("radius", None)?,
            },
            "sharp_norm" => CatalogEntry::SharpNorm {
                alpha: number("alpha", None)?,
                dim: dim("dim")?,
            },
            _ => unreachable!(),
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

fn finite_list(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} must be non-empty")));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be finite")));
    }
    Ok(())
}

/// Builds a problem instance from its catalog entry.
pub fn make_problem(entry: &CatalogEntry) -> Result<Problem> {
    let name = entry.name();
    let problem = match entry {
        CatalogEntry::Quartic1D => Problem {
            name,
            dim: 1,
            objective: Objective::Quartic1D,
            f_inf: 0.0,
            weak_sharp: Some(WeakSharp {
                alpha: 0.25,
                order: 4.0,
            }),
            strong_convexity: None,
        },
        CatalogEntry::ScaledAbs { mu, dim } => {
            let mu = positive("mu", *mu)?;
            if *dim == 0 {
                return Err(Error::InvalidParameter("dim must be >= 1".into()));
            }
            Problem {
                name,
                dim: *dim,
                objective: Objective::ScaledAbs { mu },
                f_inf: 0.0,
                // mu ||x||_1 >= mu ||x||_2 = mu dist(x, {0})
                weak_sharp: Some(WeakSharp {
                    alpha: mu,
                    order: 1.0,
                }),
                strong_convexity: None,
            }
        }
        CatalogEntry::Quadratic { q } => {
            let qf = QuadraticForm::new(Matrix::from_rows(q)?)?;
            let weak_sharp = qf.sigma_plus().map(|s| WeakSharp {
                alpha: 0.5 * s,
                order: 2.0,
            });
            let smallest = qf.eigen.values[0];
            Problem {
                name,
                dim: q.len(),
                strong_convexity: (smallest > 0.0).then_some(smallest),
                objective: Objective::Quadratic(qf),
                f_inf: 0.0,
                weak_sharp,
            }
        }
        CatalogEntry::IndicatorBox { lower, upper } => {
            finite_list("lower", lower)?;
            finite_list("upper", upper)?;
            check_dims(lower.len(), upper.len())?;
            if let Some(i) = lower.iter().zip(upper).position(|(l, u)| l > u) {
                return Err(Error::InvalidParameter(format!(
                    "empty box: lower[{i}] = {} > upper[{i}] = {}",
                    lower[i], upper[i]
                )));
            }
            Problem {
                name,
                dim: lower.len(),
                objective: Objective::IndicatorBox {
                    lower: lower.clone(),
                    upper: upper.clone(),
                },
                f_inf: 0.0,
                weak_sharp: None,
                strong_convexity: None,
            }
        }
        CatalogEntry::IndicatorBall { center, radius } => {
            finite_list("center", center)?;
            let radius = positive("radius", *radius)?;
            Problem {
                name,
                dim: center.len(),
                objective: Objective::IndicatorBall {
                    center: center.clone(),
                    radius,
                },
                f_inf: 0.0,
                weak_sharp: None,
                strong_convexity: None,
            }
        }
        CatalogEntry::SharpNorm { alpha, dim } => {
            let alpha = positive("alpha", *alpha)?;
            if *dim == 0 {
                return Err(Error::InvalidParameter("dim must be >= 1".into()));
            }
            Problem {
                name,
                dim: *dim,
                objective: Objective::SharpNorm { alpha },
                f_inf: 0.0,
                weak_sharp: Some(WeakSharp { alpha, order: 1.0 }),
                strong_convexity: None,
            }
        }
    };
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn quartic_value() {
        let p = make_problem(&CatalogEntry::Quartic1D).unwrap();
        assert_eq!(p.value(&v(&[2.0])).unwrap(), 4.0);
    }

    #[test]
    fn scaled_abs_is_sharp_of_order_one() {
        let p = make_problem(&CatalogEntry::ScaledAbs { mu: 1.0, dim: 1 }).unwrap();
        assert_eq!(
            p.weak_sharp(),
            Some(WeakSharp {
                alpha: 1.0,
                order: 1.0
            })
        );
    }

    #[test]
    fn quadratic_kernel_projection() {
        let p = make_problem(&CatalogEntry::Quadratic {
            q: vec![vec![1.0, 0.0], vec![0.0, 0.0]],
        })
        .unwrap();
        let proj = p.solution_projection(&v(&[3.0, 5.0])).unwrap();
        assert_eq!(proj.as_slice(), &[0.0, 5.0]);
        assert!(!p.solution_set_is_singleton());
        assert_eq!(p.strong_convexity(), None);
    }

    #[test]
    fn dist_examples() {
        let abs = make_problem(&CatalogEntry::ScaledAbs { mu: 1.0, dim: 1 }).unwrap();
        assert_eq!(dist_to_solutions(&abs, &v(&[-3.0])).unwrap(), 3.0);

        let bx = make_problem(&CatalogEntry::IndicatorBox {
            lower: vec![-1.0],
            upper: vec![1.0],
        })
        .unwrap();
        assert_eq!(dist_to_solutions(&bx, &v(&[4.0])).unwrap(), 3.0);
    }

    #[test]
    fn quadratic_dist_matches_gridded_kernel() {
        let p = make_problem(&CatalogEntry::Quadratic {
            q: vec![vec![1.0, 0.0], vec![0.0, 0.0]],
        })
        .unwrap();
        let x = [3.0, 5.0];
        // Oracle: minimize ||x - (0, s)|| over a grid of the kernel.
        let brute = (0..=20_000)
            .map(|i| -10.0 + 1e-3 * i as f64)
            .map(|s| dist(&x, &[0.0, s]))
            .fold(f64::INFINITY, f64::min);
        let got = dist_to_solutions(&p, &v(&x)).unwrap();
        assert!((got - brute).abs() < 1e-9);
        assert!((got - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            make_problem(&CatalogEntry::Quadratic {
                q: vec![vec![1.0, 0.0], vec![0.0, -1.0]]
            }),
            Err(Error::NotPsd(_))
        ));
        assert!(make_problem(&CatalogEntry::IndicatorBox {
            lower: vec![1.0],
            upper: vec![0.0]
        })
        .is_err());
        assert!(make_problem(&CatalogEntry::IndicatorBall {
            center: vec![0.0],
            radius: 0.0
        })
        .is_err());
        assert!(make_problem(&CatalogEntry::ScaledAbs { mu: -1.0, dim: 1 }).is_err());
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clamped() {
        let p = make_problem(&CatalogEntry::Quadratic {
            q: vec![vec![1.0, 0.0], vec![0.0, -1e-11]],
        })
        .unwrap();
        let Objective::Quadratic(qf) = p.objective() else {
            unreachable!()
        };
        assert_eq!(qf.eigen().values[0], 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = make_problem(&CatalogEntry::Quartic1D).unwrap();
        assert_eq!(
            p.value(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn catalog_from_params() {
        let mut params = BTreeMap::new();
        params.insert("mu".to_string(), Param::Number(2.0));
        assert_eq!(
            CatalogEntry::from_params("scaled_abs", &params),
            Ok(CatalogEntry::ScaledAbs { mu: 2.0, dim: 1 })
        );
        params.insert("momentum".to_string(), Param::Number(0.9));
        assert_eq!(
            CatalogEntry::from_params("scaled_abs", &params),
            Err(CatalogError::UnknownKeys(vec!["momentum".into()]))
        );
        assert!(matches!(
            CatalogEntry::from_params("rosenbrock", &BTreeMap::new()),
            Err(CatalogError::UnknownName(_))
        ));
    }
}
