use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objectives::{LeastSquares, Logistic};
use crate::support::SupportSet;

/// Hard cap on the number of supports any brute-force routine will enumerate.
pub const MAX_SUPPORTS: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMethod {
    /// Exact, by enumerating every support of the given size.
    BruteForce,
    /// Exact, read off a diagonal Gram matrix.
    DiagonalAnalytic,
    /// Curvature-scaled interval for non-quadratic losses.
    Bound,
    /// Extremes over randomly sampled supports: `rho_minus` is an upper bound on the
    /// true value and `kappa`, `kappa_tilde` are lower bounds.
    Sampled,
}

/// Restricted smoothness / strong convexity at one sparsity level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictedConstants {
    pub level: usize,
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// `ρ₂⁺`, the numerator of `κ̃`.
    pub rho2_plus: f64,
    pub kappa: f64,
    /// `ρ₂⁺ / ρ_s⁻`.
    pub kappa_tilde: f64,
    /// `(κ − 1)/(κ + 1)`.
    pub delta: f64,
    pub method: ConstantsMethod,
}

impl RestrictedConstants {
    fn from_parts(level: usize, rho_plus: f64, rho_minus: f64, rho2_plus: f64, method: ConstantsMethod) -> Self {
        let kappa = rho_plus / rho_minus;
        let delta = if kappa.is_finite() {
            (kappa - 1.0) / (kappa + 1.0)
        } else {
            1.0
        };
        RestrictedConstants {
            level,
            rho_plus,
            rho_minus,
            rho2_plus,
            kappa,
            kappa_tilde: rho2_plus / rho_minus,
            delta,
            method,
        }
    }
}

/// `C(n, k)` without overflow for the sizes we care about.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub(crate) fn guard(n: usize, k: usize) -> Result<()> {
    let count = binomial(n, k);
    if count > MAX_SUPPORTS {
        return Err(Error::TooManySupports {
            count,
            limit: MAX_SUPPORTS,
        });
    }
    Ok(())
}

fn sub_gram(gram: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |p, q| gram[(idx[p], idx[q])])
}

fn extreme_eigenvalues(m: DMatrix<f64>) -> (f64, f64) {
    let ev = SymmetricEigen::new(m).eigenvalues;
    (ev.min(), ev.max())
}

fn is_diagonal(gram: &DMatrix<f64>) -> bool {
    let n = gram.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || gram[(i, j)] == 0.0))
}

/// `(min λ_min, max λ_max)` of `G_SS` over all `|S| = k`.
fn enumerate_extremes(gram: &DMatrix<f64>, k: usize) -> (f64, f64) {
    let n = gram.nrows();
    (0..n)
        .combinations(k)
        .par_bridge()
        .map(|idx| extreme_eigenvalues(sub_gram(gram, &idx)))
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// Brute-force `ρ_s⁺ = max_S λ_max(A_Sᵀ A_S)` and `ρ_s⁻ = min_S λ_min(A_Sᵀ A_S)`.
///
/// A diagonal Gram matrix is read off directly. Otherwise `C(n, s)` and `C(n, 2)`
/// must both stay within [`MAX_SUPPORTS`].
pub fn brute_force_restricted_constants(f: &LeastSquares, level: usize) -> Result<RestrictedConstants> {
    let gram = f.gram();
    let n = gram.nrows();
    if level == 0 || level > n {
        return Err(invalid(format!("sparsity level must lie in 1..={n}, got {level}")));
    }
    if is_diagonal(gram) {
        let d = gram.diagonal();
        let (lo, hi) = (d.min(), d.max());
        return Ok(RestrictedConstants::from_parts(level, hi, lo, hi, ConstantsMethod::DiagonalAnalytic));
    }
    guard(n, level)?;
    let pair_level = 2.min(n);
    guard(n, pair_level)?;
    let (lo, hi) = enumerate_extremes(gram, level);
    let rho2 = if level == pair_level {
        hi
    } else {
        enumerate_extremes(gram, pair_level).1
    };
    Ok(RestrictedConstants::from_parts(level, hi, lo, rho2, ConstantsMethod::BruteForce))
}

/// Brute-force `ρ₂⁺` over all column pairs.
pub fn brute_force_rho2_plus(f: &LeastSquares) -> Result<f64> {
    let n = f.gram().nrows();
    let k = 2.min(n);
    guard(n, k)?;
    Ok(enumerate_extremes(f.gram(), k).1)
}

/// Extremes over `samples` uniformly random supports of size `level`, with `ρ₂⁺`
/// taken exactly over column pairs.
pub fn sampled_restricted_constants<R: Rng + ?Sized>(
    f: &LeastSquares,
    level: usize,
    samples: usize,
    rng: &mut R,
) -> Result<RestrictedConstants> {
    let gram = f.gram();
    let n = gram.nrows();
    if level == 0 || level > n || samples == 0 {
        return Err(invalid("sampled constants need 1 <= level <= n and samples >= 1"));
    }
    let rho2 = brute_force_rho2_plus(f)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..samples {
        let idx = SupportSet::from_indices(sample(rng, n, level));
        let (a, b) = extreme_eigenvalues(sub_gram(gram, idx.as_slice()));
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok(RestrictedConstants::from_parts(level, hi, lo, rho2, ConstantsMethod::Sampled))
}

/// Interval bounds for the logistic loss: curvature of the sigmoid lies in
/// `(0, ¼]`, so `ρ⁺ ≤ ¼·ρ⁺(AᵀA)` and `ρ⁻ ≥ c·ρ⁻(AᵀA)` for any curvature floor `c`
/// valid on the region of interest.
pub fn logistic_constant_bounds(f: &Logistic, level: usize, min_curvature: f64) -> Result<RestrictedConstants> {
    if !(min_curvature > 0.0 && min_curvature <= 0.25) {
        return Err(invalid(format!("curvature floor must lie in (0, 1/4], got {min_curvature}")));
    }
    let quad = LeastSquares::new(f.design().clone(), nalgebra::DVector::zeros(f.design().nrows()))?;
    let base = brute_force_restricted_constants(&quad, level)?;
    Ok(RestrictedConstants::from_parts(
        level,
        0.25 * base.rho_plus,
        min_curvature * base.rho_minus,
        0.25 * base.rho2_plus,
        ConstantsMethod::Bound,
    ))
}

/// Right-hand side of the RIP tradeoff `δ_{s+s*} < ((2−θ)√(s/s*) − 1)/((2−θ)√(s/s*) + 1)`.
pub fn rip_tradeoff_bound(s: usize, s_star: usize, theta: f64) -> Result<f64> {
    if s_star == 0 || s < s_star {
        return Err(invalid(format!("need s >= s* >= 1, got s = {s}, s* = {s_star}")));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0, 1), got {theta}")));
    }
    let q = (2.0 - theta) * (s as f64 / s_star as f64).sqrt();
    Ok((q - 1.0) / (q + 1.0))
}

/// `θ` used to approximate the open limit `θ → 0`.
pub const DEFAULT_THETA: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ls(a: DMatrix<f64>) -> LeastSquares {
        let m = a.nrows();
        LeastSquares::new(a, DVector::zeros(m)).unwrap()
    }

    #[test]
    fn diagonal_design() {
        let f = ls(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5])));
        for s in 1..=3 {
            let c = brute_force_restricted_constants(&f, s).unwrap();
            assert_eq!(c.rho_plus, 4.0);
            assert_eq!(c.rho_minus, 0.25);
            assert_eq!(c.kappa, 16.0);
            assert_eq!(c.method, ConstantsMethod::DiagonalAnalytic);
        }
    }

    #[test]
    fn orthonormal_design_is_isometric() {
        // rotation: orthonormal columns, non-diagonal Gram entries are rounding noise
        let t = 0.3f64;
        let a = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let f = ls(a);
        for s in 1..=2 {
            let c = brute_force_restricted_constants(&f, s).unwrap();
            assert_abs_diff_eq!(c.kappa, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.delta, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pairs_match_closed_form_eigenvalues() {
        // Oracle: 2x2 symmetric eigenvalues in closed form.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = DMatrix::from_fn(8, 6, |_, _| StandardNormal.sample(&mut rng));
        let g = a.tr_mul(&a);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..6 {
            for j in (i + 1)..6 {
                let (p, q, r): (f64, f64, f64) = (g[(i, i)], g[(j, j)], g[(i, j)]);
                let mid = 0.5 * (p + q);
                let rad = (0.25 * (p - q).powi(2) + r * r).sqrt();
                lo = lo.min(mid - rad);
                hi = hi.max(mid + rad);
            }
        }
        let c = brute_force_restricted_constants(&ls(a), 2).unwrap();
        assert_abs_diff_eq!(c.rho_plus, hi, epsilon = 1e-10);
        assert_abs_diff_eq!(c.rho_minus, lo, epsilon = 1e-10);
        assert_abs_diff_eq!(c.rho2_plus, hi, epsilon = 1e-10);
    }

    #[test]
    fn guard_refuses_large_enumerations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DMatrix::from_fn(30, 60, |_, _| StandardNormal.sample(&mut rng));
        match brute_force_restricted_constants(&ls(a), 10) {
            Err(Error::TooManySupports { count, .. }) => assert_eq!(count, binomial(60, 10)),
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn rip_tradeoff_table() {
        let v = |k| rip_tradeoff_bound(k, 1, DEFAULT_THETA).unwrap();
        assert_abs_diff_eq!(v(1), 1.0 / 3.0, epsilon = 1e-6);
        let q = 2.0 * 2f64.sqrt();
        assert_abs_diff_eq!(v(2), (q - 1.0) / (q + 1.0), epsilon = 1e-6);
        assert!(rip_tradeoff_bound(1, 2, 0.0).is_err());
        assert!(rip_tradeoff_bound(2, 1, 1.0).is_err());
    }

    #[test]
    fn sampled_kappa_never_exceeds_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(10, 7, |_, _| StandardNormal.sample(&mut rng));
        let f = ls(a);
        let exact = brute_force_restricted_constants(&f, 3).unwrap();
        let smp = sampled_restricted_constants(&f, 3, 10, &mut rng).unwrap();
        assert!(smp.rho_minus >= exact.rho_minus - 1e-12);
        assert!(smp.kappa_tilde <= exact.kappa_tilde + 1e-12);
    }
}
