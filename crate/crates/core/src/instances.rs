//! Synthetic problems with a known sparse target.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::objectives::LeastSquares;
use crate::support::{DenseVector, SupportSet};

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub objective: LeastSquares,
    pub x_star: DenseVector,
    pub s_star: usize,
    pub noise_level: f64,
    pub seed: u64,
}

impl PlantedInstance {
    pub fn support(&self) -> SupportSet {
        SupportSet::from_indices((0..self.x_star.len()).filter(|&i| self.x_star[i] != 0.0))
    }
}

fn normalize_columns(a: &mut DMatrix<f64>) {
    for mut c in a.column_iter_mut() {
        let norm = c.norm();
        if norm > 0.0 {
            c /= norm;
        }
    }
}

fn plant(a: DMatrix<f64>, s_star: usize, noise_level: f64, seed: u64, rng: &mut ChaCha8Rng) -> Result<PlantedInstance> {
    let (m, n) = a.shape();
    let mut x_star = DVector::zeros(n);
    for i in sample(rng, n, s_star) {
        x_star[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let mut b = &a * &x_star;
    if noise_level > 0.0 {
        let g = DVector::<f64>::from_fn(m, |_, _| StandardNormal.sample(rng));
        b.axpy(noise_level / g.norm(), &g, 1.0);
    }
    Ok(PlantedInstance {
        objective: LeastSquares::new(a, b)?,
        x_star,
        s_star,
        noise_level,
        seed,
    })
}

fn check_planted(m: usize, n: usize, s_star: usize, noise_level: f64) -> Result<()> {
    if m == 0 || s_star == 0 || s_star > n {
        return Err(invalid(format!("need m >= 1 and 1 <= s* <= n, got m = {m}, n = {n}, s* = {s_star}")));
    }
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(invalid(format!("noise level must be finite and nonnegative, got {noise_level}")));
    }
    Ok(())
}

/// Unit-norm Gaussian columns, `±1` target entries on a uniformly random support,
/// and `b = Ax* + noise_level·u` with `u` a uniformly random unit vector.
pub fn gaussian_planted(m: usize, n: usize, s_star: usize, noise_level: f64, seed: u64) -> Result<PlantedInstance> {
    check_planted(m, n, s_star, noise_level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    normalize_columns(&mut a);
    plant(a, s_star, noise_level, seed, &mut rng)
}

/// Like [`gaussian_planted`], but neighbouring columns follow an AR(1) chain
/// `a_j = ρ a_{j−1} + √(1−ρ²) z_j` before normalization, so greedy selection is
/// easily misled.
pub fn correlated_planted(
    m: usize,
    n: usize,
    s_star: usize,
    noise_level: f64,
    correlation: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    check_planted(m, n, s_star, noise_level)?;
    if !(0.0..1.0).contains(&correlation) {
        return Err(invalid(format!("correlation must lie in [0, 1), got {correlation}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fresh = (1.0 - correlation * correlation).sqrt();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        for r in 0..m {
            let z: f64 = StandardNormal.sample(&mut rng);
            a[(r, j)] = if j == 0 { z } else { correlation * a[(r, j - 1)] + fresh * z };
        }
    }
    normalize_columns(&mut a);
    plant(a, s_star, noise_level, seed, &mut rng)
}

/// Diagonal instance on which OMPR started from `initial_support` stalls at
/// `f(x*) + Θ(s*κ²)`.
#[derive(Clone, Debug)]
pub struct AdversarialInstance {
    pub planted: PlantedInstance,
    pub initial_support: SupportSet,
    pub kappa: usize,
    pub delta: f64,
    /// Target block `I₁`, size `s*`.
    pub i1: Range<usize>,
    /// Heavy block `I₂`, size `s*κ`, with column scale `√κ`.
    pub i2: Range<usize>,
    /// Decoy block `I₃`, size `s*κ²`.
    pub i3: Range<usize>,
}

impl AdversarialInstance {
    /// Sparsity `s = s*κ²/2` the construction is meant to be run at.
    pub fn sparsity(&self) -> usize {
        self.initial_support.len()
    }

    /// `s*κ²(1 − δ)`.
    pub fn target_value(&self) -> f64 {
        let (s, k) = (self.planted.s_star as f64, self.kappa as f64);
        s * k * k * (1.0 - self.delta)
    }

    /// `f(x⁰) = s*κ²(5/4 − 3δ)`.
    pub fn initial_value(&self) -> f64 {
        let (s, k) = (self.planted.s_star as f64, self.kappa as f64);
        s * k * k * (1.25 - 3.0 * self.delta)
    }

    /// `f(x^t) − f(x*)` after any number `t ≥ 1` of OMPR steps:
    /// `s*κ²(¼ − 2δ) − ½(κ(1 − 2δ) − 1)`.
    pub fn stalled_gap(&self) -> f64 {
        let (s, k, d) = (self.planted.s_star as f64, self.kappa as f64, self.delta);
        s * k * k * (0.25 - 2.0 * d) - 0.5 * (k * (1.0 - 2.0 * d) - 1.0)
    }
}

/// Default tie-breaking perturbation.
pub const DEFAULT_ADVERSARIAL_DELTA: f64 = 1e-3;

/// `n = s*(1 + κ + κ²)` coordinates, `A` diagonal with entries `1, √κ, 1` on
/// `I₁, I₂, I₃`, `b = (κ√(1−4δ), √κ√(1−2δ), 1)` and `x* = κ√(1−4δ)` on `I₁`.
/// The initial support is the first `s*κ²/2` indices of `I₃`.
pub fn ompr_adversarial(s_star: usize, kappa: usize, delta: f64) -> Result<AdversarialInstance> {
    if s_star == 0 {
        return Err(invalid("s* must be at least 1"));
    }
    if kappa < 2 || !kappa.is_multiple_of(2) {
        return Err(invalid(format!("kappa must be an even integer >= 2, got {kappa}")));
    }
    if !(delta > 0.0 && delta < 0.125) {
        return Err(invalid(format!("delta must lie in (0, 1/8), got {delta}")));
    }
    let k = kappa as f64;
    let i1 = 0..s_star;
    let i2 = s_star..s_star * (1 + kappa);
    let i3 = s_star * (1 + kappa)..s_star * (1 + kappa + kappa * kappa);
    let n = i3.end;
    let mut diag = DVector::from_element(n, 1.0);
    let mut b = DVector::from_element(n, 1.0);
    let mut x_star = DVector::zeros(n);
    for i in i1.clone() {
        b[i] = k * (1.0 - 4.0 * delta).sqrt();
        x_star[i] = b[i];
    }
    for i in i2.clone() {
        diag[i] = k.sqrt();
        b[i] = k.sqrt() * (1.0 - 2.0 * delta).sqrt();
    }
    let initial_support = SupportSet::from_indices(i3.start..i3.start + s_star * kappa * kappa / 2);
    Ok(AdversarialInstance {
        planted: PlantedInstance {
            objective: LeastSquares::new(DMatrix::from_diagonal(&diag), b)?,
            x_star,
            s_star,
            noise_level: 0.0,
            seed: 0,
        },
        initial_support,
        kappa,
        delta,
        i1,
        i2,
        i3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Objective, DEFAULT_INNER_TOL};
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_target_is_exact() {
        let p = gaussian_planted(20, 30, 3, 0.0, 4).unwrap();
        assert!(p.objective.value(&p.x_star) < 1e-28);
        assert_eq!(p.support().len(), 3);
        for c in p.objective.design().column_iter() {
            assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn seeded_generation_is_bit_identical() {
        let a = gaussian_planted(10, 12, 2, 0.1, 77).unwrap();
        let b = gaussian_planted(10, 12, 2, 0.1, 77).unwrap();
        assert_eq!(a.objective.design(), b.objective.design());
        assert_eq!(a.objective.target(), b.objective.target());
        assert_eq!(a.x_star, b.x_star);
    }

    #[test]
    fn noise_has_requested_norm() {
        let p = gaussian_planted(15, 20, 2, 0.5, 3).unwrap();
        let r = p.objective.residual(&p.x_star);
        assert_abs_diff_eq!(r.norm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn correlated_columns_are_correlated() {
        let p = correlated_planted(400, 5, 2, 0.0, 0.9, 1).unwrap();
        let a = p.objective.design();
        let c = a.column(0).dot(&a.column(1));
        assert!(c > 0.8, "neighbour correlation {c}");
    }

    #[test]
    fn adversarial_values() {
        let inst = ompr_adversarial(1, 2, 0.01).unwrap();
        let f = &inst.planted.objective;
        assert_eq!(f.dim(), 7);
        assert_abs_diff_eq!(f.value(&inst.planted.x_star), 3.96, epsilon = 1e-12);
        assert_abs_diff_eq!(inst.target_value(), 3.96, epsilon = 1e-12);
        let x0 = f.restricted_minimize(&inst.initial_support, DEFAULT_INNER_TOL);
        assert_abs_diff_eq!(x0.value, 4.88, epsilon = 1e-12);
        assert_abs_diff_eq!(inst.initial_value(), 4.88, epsilon = 1e-12);
        let g = f.gradient(&x0.x);
        for i in inst.i2.clone() {
            assert_abs_diff_eq!(g[i], -2.0 * 0.98f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn adversarial_layout() {
        let inst = ompr_adversarial(2, 4, 1e-3).unwrap();
        assert_eq!(inst.i1, 0..2);
        assert_eq!(inst.i2, 2..10);
        assert_eq!(inst.i3, 10..42);
        assert_eq!(inst.sparsity(), 16);
        assert!(ompr_adversarial(1, 3, 1e-3).is_err());
        assert!(ompr_adversarial(1, 2, 0.2).is_err());
    }
}
