//! The objective-oracle contract every solver and check is written against.

use serde::{Deserialize, Serialize};

use crate::support::{DenseVector, SupportSet};

/// Default gradient tolerance (infinity norm on the support) for restricted solves.
pub const DEFAULT_INNER_TOL: f64 = 1e-10;

/// Diagnostics raised by a restricted solve. None of them abort a solver run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveFlags {
    /// The restricted Hessian was singular; the minimum-norm minimizer was returned.
    pub rank_deficient: bool,
    /// The infimum is not attained (separable logistic data); magnitudes were capped.
    pub capped: bool,
    /// The iteration cap was hit before the gradient tolerance was met.
    pub not_converged: bool,
}

impl SolveFlags {
    pub fn merge(&mut self, other: SolveFlags) {
        self.rank_deficient |= other.rank_deficient;
        self.capped |= other.capped;
        self.not_converged |= other.not_converged;
    }

    pub fn any(&self) -> bool {
        self.rank_deficient || self.capped || self.not_converged
    }
}

/// Output of a restricted minimization.
#[derive(Clone, Debug)]
pub struct RestrictedSolution {
    /// Full-length vector, zero outside the requested support.
    pub x: DenseVector,
    /// Objective value at `x`, including any diagonal shift that was applied.
    pub value: f64,
    pub flags: SolveFlags,
}

/// A smooth convex function `f: R^n -> R` with a restricted minimization oracle.
///
/// Implementations are immutable and shared read-only between concurrent solver runs.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DenseVector) -> f64;

    fn gradient(&self, x: &DenseVector) -> DenseVector;

    /// Minimizes `f(x) + ½ Σ_k shift[k]·x_{S[k]}²` over `supp(x) ⊆ S`.
    ///
    /// `shift` is aligned with `support.as_slice()` and every entry is `≥ 0`.
    /// On return `‖∇_S‖∞ ≤ tol` unless a flag says otherwise.
    fn minimize_shifted(&self, support: &SupportSet, shift: &[f64], tol: f64)
        -> RestrictedSolution;

    /// `argmin { f(x) | supp(x) ⊆ S }`.
    fn restricted_minimize(&self, support: &SupportSet, tol: f64) -> RestrictedSolution {
        let shift = vec![0.0; support.len()];
        self.minimize_shifted(support, &shift, tol)
    }

    /// Upper bound on `ρ₂⁺`, when the objective can derive one from its data.
    fn rho2_plus_bound(&self) -> Option<f64> {
        None
    }

    /// Upper bound on the full (unrestricted) gradient Lipschitz constant.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    /// A value `B ≤ min_x f(x)` used to seed the binary search on the target value.
    fn global_lower_bound(&self) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        (**self).gradient(x)
    }
    fn minimize_shifted(
        &self,
        support: &SupportSet,
        shift: &[f64],
        tol: f64,
    ) -> RestrictedSolution {
        (**self).minimize_shifted(support, shift, tol)
    }
    fn rho2_plus_bound(&self) -> Option<f64> {
        (**self).rho2_plus_bound()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
    fn global_lower_bound(&self) -> f64 {
        (**self).global_lower_bound()
    }
}
