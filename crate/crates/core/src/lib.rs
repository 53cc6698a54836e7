//! Formal orthogonal polynomial toolkit and the A13/B13 Lanczos-type solver.
//!
//! * [`moments`] builds `c_i = (y, Aⁱ r₀)` and the functionals `c`, `c⁽¹⁾`.
//! * [`oracle`] constructs `P_k` and `P⁽¹⁾_k` straight from moment systems.
//! * [`recurrences`] computes A13/B13 coefficients and fits relation forms.
//! * [`solver`] runs the recurrence pair as an iterative solver for `Ax = b`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod moments;
pub mod mtx;
pub mod oracle;
pub mod polynomial;
pub mod recurrences;
pub mod solver;
pub mod verify;

pub use error::{BreakdownKind, Error, Result};
pub use linalg::{least_squares, matvec, solve_dense, transpose_matvec, Matrix, Vector};
pub use moments::{apply_functional, compute_moments, hankel_det, Functional, MomentSequence};
pub use oracle::{oracle_p, oracle_p1};
pub use polynomial::{poly_matrix_apply, Family, Polynomial};
pub use recurrences::{
    a13_coefficients, assemble_scalar_products, b13_coefficients, fit_relation, fit_relation_in, A13Coeffs, B13Coeffs,
    FitNorm, FitReport, RelationForm, ScalarProducts, Verdict,
};
pub use solver::{bootstrap, restart, solve, step, SolveReport, SolveStatus, SolverConfig, SolverState};
