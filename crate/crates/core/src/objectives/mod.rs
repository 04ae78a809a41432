//! Concrete objectives: least squares, logistic loss and the adaptive regularizer.

mod least_squares;
mod logistic;
mod regularized;

pub use least_squares::LeastSquares;
pub use logistic::{sigmoid, Logistic, LOGISTIC_CAP};
pub use regularized::Regularized;

use crate::error::{invalid, Result};
use crate::objective::Objective;

/// Upper bound on `ρ₂⁺`, from `ρ₂⁺ ≤ 2ρ₁⁺`.
///
/// Least squares gives `2·maxᵢ‖aᵢ‖²`, logistic `2·¼·maxᵢ‖aᵢ‖²`. Objectives that
/// cannot bound their own curvature need `user_value`.
pub fn estimate_rho2_plus<F: Objective + ?Sized>(f: &F, user_value: Option<f64>) -> Result<f64> {
    if let Some(v) = user_value {
        if v > 0.0 && v.is_finite() {
            return Ok(v);
        }
        return Err(invalid(format!("user-supplied rho2+ must be positive, got {v}")));
    }
    f.rho2_plus_bound()
        .ok_or_else(|| invalid("objective has no curvature bound; supply rho2+ explicitly"))
}

/// Either objective the CLI and sweep harness can build from a dataset.
#[derive(Clone, Debug)]
pub enum Loss {
    LeastSquares(LeastSquares),
    Logistic(Logistic),
}

impl Loss {
    pub fn as_objective(&self) -> &dyn Objective {
        match self {
            Loss::LeastSquares(f) => f,
            Loss::Logistic(f) => f,
        }
    }
}
