//! Sparse convex optimization under an exact sparsity constraint.
//!
//! Solvers: iterative hard thresholding, orthogonal matching pursuit (OMP), OMP with
//! replacement (OMPR), exhaustive local search, adaptively regularized hard
//! thresholding (ARHT) and an ℓ₁ path baseline. Every solver is written against the
//! [`Objective`] oracle; [`objectives`] provides least squares and logistic loss.
//!
//! [`analysis`] computes restricted condition numbers, RIP and RGOC constants and
//! checks recovery guarantees by brute force on small instances. [`instances`]
//! generates planted and adversarial problems, and [`io`] covers dataset loading,
//! preprocessing and benchmark sweeps.

pub mod analysis;
pub mod error;
pub mod instances;
pub mod io;
pub mod objective;
pub mod objectives;
pub mod report;
pub mod solvers;
pub mod support;

pub use error::{Error, Result};
pub use objective::{Objective, RestrictedSolution, SolveFlags, DEFAULT_INNER_TOL};
pub use objectives::{estimate_rho2_plus, LeastSquares, Logistic, Loss, Regularized};
pub use report::{ArhtDiagnostics, Flag, RegStep, SolverReport, StepKind, TraceEntry};
pub use solvers::{Init, SolverConfig};
pub use support::{hard_threshold, support_of, DenseVector, SupportSet};
