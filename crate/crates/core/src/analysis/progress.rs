use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::Objective;
use crate::solvers::ompr_step;
use crate::support::{support_of, DenseVector, SupportSet, DEFAULT_ZERO_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressCase {
    /// `S* ⊆ S^t` or `f(x^t) ≤ f(x*)`: nothing to prove.
    Vacuous,
    /// `μκ̃ ≤ 1`.
    WellConditioned,
    /// `μκ̃ > 1` and `f(x*) = f(x̃^t)`.
    IllConditionedTight,
    /// `μκ̃ > 1` and `f(x*) > f(x̃^t)`.
    IllConditionedGap,
}

/// Both sides of the one-step OMPR progress inequality
/// `f(x^{t+1}) − f(x*) ≤ factor · (f(x^t) − f(x*))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProgressCheck {
    pub case: ProgressCase,
    pub mu: f64,
    pub kappa_tilde: f64,
    /// `|S* \ S^t|`.
    pub missing: usize,
    pub factor: f64,
    /// `f(x^{t+1}) − f(x*)`.
    pub lhs: f64,
    /// `factor · (f(x^t) − f(x*))`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks one OMPR step from the `S^t`-restricted minimizer `x` against the
/// progress lemma.
///
/// `rho2_plus` is `ρ₂⁺` and `rho_minus` must be strong convexity at level
/// `s + s*`; `κ̃ = ρ₂⁺/ρ⁻` and `μ = √(s*/s)`. `x̃^t` is the restricted minimizer on
/// `S^t ∪ S*`. A relative slack of `slack·(1 + |f(x*)|)` absorbs inner-solve error.
#[allow(clippy::too_many_arguments)]
pub fn verify_ompr_progress<F: Objective + ?Sized>(
    f: &F,
    support: &SupportSet,
    x: &DenseVector,
    x_star: &DenseVector,
    rho2_plus: f64,
    rho_minus: f64,
    tol: f64,
    slack: f64,
) -> Result<ProgressCheck> {
    let s_star_set = support_of(x_star, DEFAULT_ZERO_TOL);
    let (s, s_star) = (support.len(), s_star_set.len());
    if s_star > s || s == 0 {
        return Err(invalid(format!("progress lemma needs s >= s* and s >= 1, got s = {s}, s* = {s_star}")));
    }
    if !(rho2_plus > 0.0 && rho_minus > 0.0) {
        return Err(invalid("restricted constants must be positive"));
    }
    let mu = (s_star as f64 / s as f64).sqrt();
    let kappa_tilde = rho2_plus / rho_minus;
    let missing = s_star_set.difference(support).len();
    let f_t = f.value(x);
    let f_star = f.value(x_star);
    let mut out = ProgressCheck {
        case: ProgressCase::Vacuous,
        mu,
        kappa_tilde,
        missing,
        factor: 1.0,
        lhs: 0.0,
        rhs: 0.0,
        holds: true,
    };
    if missing == 0 || f_t <= f_star {
        return Ok(out);
    }
    let step = ompr_step(f, support, x, &SupportSet::new(), tol)
        .ok_or_else(|| invalid("no swap available from this support"))?;
    let f_next = step.solution.value;
    let d = missing as f64;
    let mk = mu * kappa_tilde;
    let (case, factor) = if mk <= 1.0 {
        (ProgressCase::WellConditioned, 1.0 - mu / d)
    } else {
        let f_tilde = f.restricted_minimize(&support.union(&s_star_set), tol).value;
        let gap = f_star - f_tilde;
        if gap <= 1e-12 * (1.0 + f_star.abs()) {
            (ProgressCase::IllConditionedTight, 1.0 - (mu / d) * (2.0 - mk))
        } else {
            let ratio = (f_t - f_tilde) / gap;
            let correction = 2.0 * (mk - 1.0) / (ratio.sqrt() - 1.0);
            (ProgressCase::IllConditionedGap, 1.0 - (mu / d) * (2.0 - mk - correction))
        }
    };
    out.case = case;
    out.factor = factor;
    out.lhs = f_next - f_star;
    out.rhs = factor * (f_t - f_star);
    out.holds = out.lhs <= out.rhs + slack * (1.0 + f_star.abs());
    Ok(out)
}
