use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::Objective;
use crate::support::{hard_threshold, support_of, DenseVector, DEFAULT_ZERO_TOL};

/// `ζ_s = ‖H_s(∇f(x*))‖₂`, the ℓ₂ norm of the `s` largest gradient entries at `x*`.
pub fn compute_rgoc<F: Objective + ?Sized>(f: &F, x_star: &DenseVector, level: usize) -> Result<f64> {
    check_dims(f.dim(), x_star)?;
    Ok(hard_threshold(&f.gradient(x_star), level)?.norm())
}

fn check_dims(n: usize, x: &DenseVector) -> Result<()> {
    if x.len() != n {
        return Err(invalid(format!("vector has length {}, objective has dimension {n}", x.len())));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    /// The guarantee's precondition fails, so no judgment is made.
    ConditionUnsatisfied,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryAssessment {
    pub l2_distance: f64,
    /// `supp(x*) ⊆ supp(x)`.
    pub support_recovered: bool,
    pub rgoc: f64,
    pub bound_rhs: f64,
    /// Whether the guarantee applies to this input.
    pub condition_satisfied: bool,
    /// Solution checks: whether `l2_distance ≤ bound_rhs`. Support checks: `support_recovered`.
    pub holds: bool,
}

impl RecoveryAssessment {
    pub fn verdict(&self) -> Verdict {
        match (self.condition_satisfied, self.holds) {
            (false, _) => Verdict::ConditionUnsatisfied,
            (true, true) => Verdict::Satisfied,
            (true, false) => Verdict::Violated,
        }
    }
}

/// `(ζ/ρ⁻)(1 + √(1 + 2ερ⁻/ζ²))`, written so that `ζ = 0` gives `√(2ε/ρ⁻)`.
pub fn solution_recovery_bound(zeta: f64, rho_minus: f64, eps: f64) -> f64 {
    (zeta + (zeta * zeta + 2.0 * eps * rho_minus).sqrt()) / rho_minus
}

/// Checks `‖x − x*‖₂` against the recovery bound for any `x` with `f(x) ≤ f(x*) + ε`.
///
/// `ζ` is taken at level `|supp(x) ∪ supp(x*)|`, the support of `x − x*`, so the
/// bound is valid whenever `rho_minus` is the strong convexity constant at that
/// level. `condition_satisfied` records whether `f(x) ≤ f(x*) + ε` actually holds.
/// With `theta` given, `bound_rhs` is the simplified `(2 + θ)ζ/ρ⁻`, which dominates
/// the exact form once `ε ≤ θ(1 + θ/2)ζ²/ρ⁻`; that smallness is folded into the condition.
pub fn check_solution_recovery<F: Objective + ?Sized>(
    f: &F,
    x: &DenseVector,
    x_star: &DenseVector,
    rho_minus: f64,
    eps: f64,
    theta: Option<f64>,
) -> Result<RecoveryAssessment> {
    check_dims(f.dim(), x)?;
    check_dims(f.dim(), x_star)?;
    if !(rho_minus > 0.0) || eps < 0.0 {
        return Err(invalid("need rho_minus > 0 and eps >= 0"));
    }
    let s = support_of(x, DEFAULT_ZERO_TOL);
    let s_star = support_of(x_star, DEFAULT_ZERO_TOL);
    let level = s.union(&s_star).len();
    let zeta = compute_rgoc(f, x_star, level)?;
    let mut condition = f.value(x) <= f.value(x_star) + eps;
    let bound = match theta {
        Some(t) => {
            condition &= eps <= t * (1.0 + 0.5 * t) * zeta * zeta / rho_minus;
            (2.0 + t) * zeta / rho_minus
        }
        None => solution_recovery_bound(zeta, rho_minus, eps),
    };
    let dist = (x - x_star).norm();
    Ok(RecoveryAssessment {
        l2_distance: dist,
        support_recovered: s_star.is_subset(&s),
        rgoc: zeta,
        bound_rhs: bound,
        condition_satisfied: condition,
        holds: dist <= bound * (1.0 + 1e-12) + 1e-15,
    })
}

/// Support recovery: `|x*_min| > ζ/ρ⁻` is the precondition, `supp(x*) ⊆ supp(x)` the claim.
pub fn check_support_recovery(x: &DenseVector, x_star: &DenseVector, zeta: f64, rho_minus: f64) -> Result<RecoveryAssessment> {
    if x.len() != x_star.len() {
        return Err(invalid("x and x* differ in length"));
    }
    if !(rho_minus > 0.0) || zeta < 0.0 {
        return Err(invalid("need rho_minus > 0 and zeta >= 0"));
    }
    let s = support_of(x, DEFAULT_ZERO_TOL);
    let s_star = support_of(x_star, DEFAULT_ZERO_TOL);
    let x_min = s_star
        .iter()
        .map(|i| x_star[i].abs())
        .fold(f64::INFINITY, f64::min);
    let rhs = zeta / rho_minus;
    let recovered = s_star.is_subset(&s);
    Ok(RecoveryAssessment {
        l2_distance: (x - x_star).norm(),
        support_recovered: recovered,
        rgoc: zeta,
        bound_rhs: rhs,
        condition_satisfied: s_star.is_empty() || x_min > rhs,
        holds: recovered,
    })
}
