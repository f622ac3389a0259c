//! Numerical laboratory for the radial quasilinear Schrödinger equation
//! `i u_t = Delta u + 2u h'(|u|^2) Delta h(|u|^2) + V(x) u` in `R^N`, `N >= 3`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod scenarios;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::{FieldState, RadialGrid};
pub use model::{InitialData, Nonlinearity, Potential, PowerTerm, ProblemSpec, Sign};
pub use solver::{RunOutcome, RunStatus, Solver, StepperConfig};
