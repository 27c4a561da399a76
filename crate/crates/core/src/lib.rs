//! Trust-region proximal point methods with exact subproblem solvers, a
//! catalog of test problems with known solution sets, and an experiment
//! harness that checks observed convergence against theoretical envelopes.

// `!(x >= 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod displacement;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod problem;
pub mod prox;
mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use problem::{make_problem, CatalogEntry, Problem};
pub use prox::{brox, prox, prox_zero, tr_prox, ProxResult, SubproblemSpec};
