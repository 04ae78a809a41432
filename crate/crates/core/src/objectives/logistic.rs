use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::objective::{Objective, RestrictedSolution, SolveFlags};
use crate::support::{DenseVector, SupportSet};

/// Coefficient magnitude at which the restricted solve gives up on separable data.
pub const LOGISTIC_CAP: f64 = 1e4;
const MAX_NEWTON_STEPS: usize = 200;
/// Unshifted loss below which the restricted problem is treated as separable.
const SEPARATED_LOSS: f64 = 1e-8;

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `f(x) = Σᵢ −bᵢ log σ((Ax)ᵢ) − (1−bᵢ) log(1 − σ((Ax)ᵢ))` with labels in `{0, 1}`.
#[derive(Clone, Debug)]
pub struct Logistic {
    a: DMatrix<f64>,
    b: DVector<f64>,
    max_col_sq: f64,
}

impl Logistic {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(invalid(format!(
                "design has {} rows but labels have {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(invalid("design matrix must be non-empty"));
        }
        if b.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(invalid("logistic labels must be 0 or 1"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("design must be finite"));
        }
        let max_col_sq = a
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0, f64::max);
        Ok(Logistic { a, b, max_col_sq })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.b
    }

    fn margins(&self, x: &DenseVector) -> DVector<f64> {
        let mut z = DVector::zeros(self.a.nrows());
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                z.axpy(xj, &self.a.column(j), 1.0);
            }
        }
        z
    }

    fn loss_from_margins(&self, z: &DVector<f64>) -> f64 {
        z.iter()
            .zip(self.b.iter())
            .map(|(&t, &y)| softplus(t) - y * t)
            .sum()
    }

    fn shifted_value(&self, x: &DenseVector, idx: &[usize], shift: &[f64]) -> f64 {
        let pen: f64 = idx.iter().zip(shift).map(|(&j, &w)| 0.5 * w * x[j] * x[j]).sum();
        self.value(x) + pen
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        self.loss_from_margins(&self.margins(x))
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let z = self.margins(x);
        let r = DVector::from_iterator(z.len(), z.iter().zip(self.b.iter()).map(|(&t, &y)| sigmoid(t) - y));
        self.a.tr_mul(&r)
    }

    /// Damped Newton on the support, restarted from zero.
    fn minimize_shifted(&self, support: &SupportSet, shift: &[f64], tol: f64) -> RestrictedSolution {
        let n = self.dim();
        let m = self.a.nrows();
        let k = support.len();
        let idx = support.as_slice();
        let mut flags = SolveFlags::default();
        let mut x = DenseVector::zeros(n);
        if k == 0 {
            let value = self.value(&x);
            return RestrictedSolution { x, value, flags };
        }
        let sub = DMatrix::from_fn(m, k, |r, p| self.a[(r, idx[p])]);
        let mut xs = DVector::<f64>::zeros(k);
        let mut converged = false;
        for _ in 0..MAX_NEWTON_STEPS {
            let z = &sub * &xs;
            let p: Vec<f64> = z.iter().map(|&t| sigmoid(t)).collect();
            let resid = DVector::from_iterator(m, p.iter().zip(self.b.iter()).map(|(&pi, &y)| pi - y));
            let mut grad = sub.tr_mul(&resid);
            for q in 0..k {
                grad[q] += shift[q] * xs[q];
            }
            if grad.amax() <= tol {
                converged = true;
                break;
            }
            let mut h = DMatrix::zeros(k, k);
            for r in 0..m {
                let w = p[r] * (1.0 - p[r]);
                if w == 0.0 {
                    continue;
                }
                let row = sub.row(r);
                h.ger(w, &row.transpose(), &row.transpose(), 1.0);
            }
            for q in 0..k {
                h[(q, q)] += shift[q];
            }
            let step = solve_damped(h, &grad);
            let f0 = self.loss_from_margins(&z)
                + (0..k).map(|q| 0.5 * shift[q] * xs[q] * xs[q]).sum::<f64>();
            let slope = -grad.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &xs - &step * t;
                let zc = &sub * &cand;
                let fc = self.loss_from_margins(&zc)
                    + (0..k).map(|q| 0.5 * shift[q] * cand[q] * cand[q]).sum::<f64>();
                if fc <= f0 + 1e-4 * t * slope.min(0.0) {
                    xs = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no descent left at machine precision
                converged = grad.amax() <= tol.max(1e-8);
                break;
            }
            if xs.amax() > LOGISTIC_CAP {
                xs.apply(|v| *v = v.clamp(-LOGISTIC_CAP, LOGISTIC_CAP));
                flags.capped = true;
                break;
            }
        }
        if shift.iter().all(|&w| w == 0.0) && self.loss_from_margins(&(&sub * &xs)) < SEPARATED_LOSS {
            // perfectly separated on S: any finite point is only an approximate minimizer
            flags.capped = true;
        } else if !converged && !flags.capped {
            flags.not_converged = true;
        }
        for (q, &j) in idx.iter().enumerate() {
            x[j] = xs[q];
        }
        let value = self.shifted_value(&x, idx, shift);
        RestrictedSolution { x, value, flags }
    }

    /// `2·¼·maxᵢ‖aᵢ‖²`: sigmoid curvature is at most ¼.
    fn rho2_plus_bound(&self) -> Option<f64> {
        Some(0.5 * self.max_col_sq)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        let g = self.a.tr_mul(&self.a);
        Some(0.25 * g.symmetric_eigenvalues().max().max(0.0))
    }

    /// The loss is nonnegative.
    fn global_lower_bound(&self) -> f64 {
        0.0
    }
}

/// Solves `H d = g`, adding a small ridge when `H` is numerically singular.
fn solve_damped(h: DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        for q in 0..hr.nrows() {
            hr[(q, q)] += ridge;
        }
        if let Some(c) = hr.cholesky() {
            return c.solve(g);
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 100.0 };
    }
    g / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::DEFAULT_INNER_TOL;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_abs_diff_eq!(sigmoid(0.0), 0.5);
        assert_abs_diff_eq!(softplus(-800.0), 0.0);
        assert_abs_diff_eq!(softplus(800.0), 800.0);
    }

    #[test]
    fn zero_is_optimal_when_labels_balanced_per_feature() {
        // every feature is orthogonal to (σ(0) − b) = ±½ pattern
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let f = Logistic::new(a, b).unwrap();
        let g = f.gradient(&DVector::zeros(2));
        // column 1 pairs labels as (1,0,1,0) against (1,-1,1,-1): gradient nonzero there
        assert!(g[0].abs() < 1e-15);
        let sol = f.restricted_minimize(&SupportSet::from_indices([0]), DEFAULT_INNER_TOL);
        assert_abs_diff_eq!(sol.x[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn intercept_only_is_log_odds() {
        // three positives out of four
        let a = DMatrix::from_element(4, 1, 1.0);
        let b = DVector::from_vec(vec![1.0, 1.0, 1.0, 0.0]);
        let f = Logistic::new(a, b).unwrap();
        let sol = f.restricted_minimize(&SupportSet::leading(1), DEFAULT_INNER_TOL);
        assert_abs_diff_eq!(sol.x[0], (0.75f64 / 0.25).ln(), epsilon = 1e-10);
    }

    #[test]
    fn separable_data_is_capped() {
        let a = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, -1.0, -2.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let f = Logistic::new(a, b).unwrap();
        let sol = f.restricted_minimize(&SupportSet::leading(1), DEFAULT_INNER_TOL);
        assert!(sol.flags.capped);
        assert!(sol.x[0] > 10.0);
        assert!(sol.value.is_finite());
    }

    #[test]
    fn rejects_non_binary_labels() {
        assert!(Logistic::new(DMatrix::zeros(2, 1), DVector::from_vec(vec![0.0, 2.0])).is_err());
    }
}
