use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::objective::{Objective, RestrictedSolution, SolveFlags};
use crate::support::{DenseVector, SupportSet};

/// Relative pivot size below which a Cholesky factor is treated as singular.
const SINGULAR_RTOL: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 3;

/// `f(x) = ½‖Ax − b‖₂²`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
    gram: DMatrix<f64>,
    atb: DVector<f64>,
}

impl LeastSquares {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(invalid(format!(
                "design has {} rows but target has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(invalid("design matrix must be non-empty"));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("design and target must be finite"));
        }
        let gram = a.tr_mul(&a);
        let atb = a.tr_mul(&b);
        Ok(LeastSquares { a, b, gram, atb })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.b
    }

    /// `AᵀA`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `maxᵢ ‖aᵢ‖₂²` over columns, which equals `ρ₁⁺`.
    pub fn max_column_norm_sq(&self) -> f64 {
        self.gram.diagonal().iter().copied().fold(0.0, f64::max)
    }

    /// `Ax − b`, touching only the nonzero columns of `x`.
    pub fn residual(&self, x: &DenseVector) -> DVector<f64> {
        let mut r = -self.b.clone();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                r.axpy(xj, &self.a.column(j), 1.0);
            }
        }
        r
    }

    /// Gradient of the shifted objective restricted to `S`, aligned with `S`.
    fn restricted_gradient(&self, x: &DenseVector, support: &SupportSet, shift: &[f64]) -> DVector<f64> {
        let r = self.residual(x);
        DVector::from_iterator(
            support.len(),
            support
                .iter()
                .zip(shift)
                .map(|(j, &w)| self.a.column(j).dot(&r) + w * x[j]),
        )
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.a.tr_mul(&self.residual(x))
    }

    fn minimize_shifted(&self, support: &SupportSet, shift: &[f64], tol: f64) -> RestrictedSolution {
        let n = self.dim();
        let k = support.len();
        debug_assert_eq!(k, shift.len());
        let mut flags = SolveFlags::default();
        let mut x = DenseVector::zeros(n);
        if k == 0 {
            let value = self.value(&x);
            return RestrictedSolution { x, value, flags };
        }
        let idx = support.as_slice();
        let mut h = DMatrix::from_fn(k, k, |p, q| self.gram[(idx[p], idx[q])]);
        for (p, &w) in shift.iter().enumerate() {
            h[(p, p)] += w;
        }
        let rhs = DVector::from_iterator(k, idx.iter().map(|&j| self.atb[j]));
        let scale = h.diagonal().iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        let chol = h.clone().cholesky().filter(|c| {
            let l = c.l_dirty();
            (0..k).all(|p| l[(p, p)] * l[(p, p)] > SINGULAR_RTOL * scale)
        });
        match chol {
            Some(chol) => {
                let mut xs = chol.solve(&rhs);
                for _ in 0..REFINEMENT_STEPS {
                    scatter(&mut x, idx, &xs);
                    let g = self.restricted_gradient(&x, support, shift);
                    if g.amax() <= tol {
                        break;
                    }
                    xs -= chol.solve(&g);
                }
                scatter(&mut x, idx, &xs);
            }
            None => {
                flags.rank_deficient = true;
                let svd = h.svd(true, true);
                let smax = svd.singular_values.max();
                let xs = svd
                    .solve(&rhs, SINGULAR_RTOL.sqrt() * smax)
                    .unwrap_or_else(|_| DVector::zeros(k));
                scatter(&mut x, idx, &xs);
            }
        }
        let shift_term: f64 = idx
            .iter()
            .zip(shift)
            .map(|(&j, &w)| 0.5 * w * x[j] * x[j])
            .sum();
        let value = self.value(&x) + shift_term;
        RestrictedSolution { x, value, flags }
    }

    fn rho2_plus_bound(&self) -> Option<f64> {
        Some(2.0 * self.max_column_norm_sq())
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.gram.clone().symmetric_eigenvalues().max().max(0.0))
    }

    /// The unrestricted minimum, via the minimum-norm full solve.
    fn global_lower_bound(&self) -> f64 {
        let full = SupportSet::full(self.dim());
        self.restricted_minimize(&full, crate::objective::DEFAULT_INNER_TOL)
            .value
            .max(0.0)
    }
}

fn scatter(x: &mut DenseVector, idx: &[usize], xs: &DVector<f64>) {
    for (p, &j) in idx.iter().enumerate() {
        x[j] = xs[p];
    }
}
