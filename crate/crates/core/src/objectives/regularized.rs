use crate::error::{invalid, Result};
use crate::objective::{Objective, RestrictedSolution};
use crate::support::{DenseVector, SupportSet};

/// `g_R(x) = f(x) + (w/2)·‖x_R‖₂²` with a shrinking regularization set `R`.
///
/// Restricted solves delegate to the inner objective with a diagonal shift of `w`
/// on the coordinates of `R ∩ S`.
#[derive(Clone, Debug)]
pub struct Regularized<F> {
    inner: F,
    weight: f64,
    reg: SupportSet,
}

impl<F: Objective> Regularized<F> {
    /// Starts with `R = [n]`.
    pub fn new(inner: F, weight: f64) -> Result<Self> {
        let n = inner.dim();
        Self::with_set(inner, weight, SupportSet::full(n))
    }

    pub fn with_set(inner: F, weight: f64, reg: SupportSet) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(invalid(format!("regularization weight must be positive, got {weight}")));
        }
        reg.check_bounds(inner.dim())?;
        Ok(Regularized { inner, weight, reg })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn reg_set(&self) -> &SupportSet {
        &self.reg
    }

    /// `R ← R \ {i}`.
    pub fn unregularize(&mut self, i: usize) -> Result<()> {
        if self.reg.remove(i) {
            Ok(())
        } else {
            Err(invalid(format!("index {i} is not in the regularization set")))
        }
    }

    /// `(w/2)·‖x_R‖₂²`.
    pub fn penalty(&self, x: &DenseVector) -> f64 {
        0.5 * self.weight * self.reg.iter().map(|i| x[i] * x[i]).sum::<f64>()
    }
}

impl<F: Objective> Objective for Regularized<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        self.inner.value(x) + self.penalty(x)
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = self.inner.gradient(x);
        for i in self.reg.iter() {
            g[i] += self.weight * x[i];
        }
        g
    }

    fn minimize_shifted(&self, support: &SupportSet, shift: &[f64], tol: f64) -> RestrictedSolution {
        let combined: Vec<f64> = support
            .iter()
            .zip(shift)
            .map(|(j, &w)| if self.reg.contains(j) { w + self.weight } else { w })
            .collect();
        self.inner.minimize_shifted(support, &combined, tol)
    }

    fn rho2_plus_bound(&self) -> Option<f64> {
        self.inner.rho2_plus_bound().map(|r| r + self.weight)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        self.inner.lipschitz_bound().map(|r| r + self.weight)
    }

    fn global_lower_bound(&self) -> f64 {
        self.inner.global_lower_bound()
    }
}
