//! Sparse group lasso: penalized least squares with a blend of group
//! (two-norm) and lasso (one-norm) penalties, fitted by blockwise coordinate
//! descent with exact group-level and coordinate-level zero tests.
//!
//! ```text
//! minimize  ½‖y − Xβ‖² + λ₁ Σ_ℓ w_ℓ‖β_ℓ‖₂ + λ₂‖β‖₁
//! ```
//!
//! Modules:
//! * [`model`]: centered problem, penalty levels, objective, prediction.
//! * [`scalar_opt`]: derivative-free bracketed 1-D minimizer.
//! * [`solver`]: the coordinate-descent fitter, zero tests and KKT check.
//! * [`path`]: `λ_max` and warm-started regularization paths.
//! * [`sim`]: synthetic block-correlated data and support-recovery counts.
//! * [`oracle`]: proximal-gradient reference solver for verification.
//! * [`io`], [`cli`]: file formats and the `sgl` command line.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod path;
pub mod scalar_opt;
pub mod sim;
pub mod solver;

pub use error::{Result, SglError};
pub use model::{Coefficients, GroupedProblem, Groups, PenaltySpec, WeightMode};
pub use path::{fit_path, lambda_max, PathResult, PathSpec};
pub use solver::{fit, fit_group_lasso, kkt_residual, FitResult, KktReport, SolverOptions};
