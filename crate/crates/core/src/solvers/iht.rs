use crate::error::{invalid, Error, Result};
use crate::objective::Objective;
use crate::objectives::estimate_rho2_plus;
use crate::report::{SolverReport, StepKind};
use crate::support::{top_magnitudes, DenseVector, SupportSet};

use super::SolverConfig;

/// `2 / ρ̂₂⁺`, i.e. the reciprocal of the `ρ₁⁺` bound.
pub fn default_step<F: Objective + ?Sized>(f: &F) -> Result<f64> {
    Ok(2.0 / estimate_rho2_plus(f, None)?)
}

/// Iterative hard thresholding, `x ← H_s(x − η∇f(x))`, for exactly
/// `cfg.max_iterations` steps from `x = 0`.
pub fn iht<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig, eta: f64) -> Result<SolverReport> {
    let n = f.dim();
    cfg.validate(n)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("step size must be positive, got {eta}")));
    }
    let mut report = SolverReport::new("iht", n, cfg.rng_seed);
    let mut x = DenseVector::zeros(n);
    let mut support = SupportSet::new();
    report.push(0, &support, f.value(&x), StepKind::Init);
    let free = cfg.sparsity - cfg.pinned.len();

    for t in 1..=cfg.max_iterations {
        let z = &x - f.gradient(&x) * eta;
        let masked: Vec<f64> = (0..n)
            .map(|i| if cfg.pinned.contains(i) { 0.0 } else { z[i] })
            .collect();
        support = top_magnitudes(&masked, free).union(&cfg.pinned);
        x = DenseVector::zeros(n);
        for i in support.iter() {
            x[i] = z[i];
        }
        let value = f.value(&x);
        if !value.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { eta });
        }
        report.push(t, &support, value, StepKind::Update);
    }
    report.iterations = cfg.max_iterations;
    let value = f.value(&x);
    report.finish(x, support, value);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquares;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn identity_lands_in_one_step() {
        let b = DVector::from_vec(vec![0.0, 2.0, 0.0, -1.0]);
        let f = LeastSquares::new(DMatrix::identity(4, 4), b.clone()).unwrap();
        let r = iht(&f, &SolverConfig::new(2).with_max_iterations(1), 1.0).unwrap();
        assert_eq!(r.final_solution, b);
    }

    #[test]
    fn picks_top_magnitude() {
        let f = LeastSquares::new(DMatrix::identity(2, 2), DVector::from_vec(vec![3.0, 1.0])).unwrap();
        let r = iht(&f, &SolverConfig::new(1).with_max_iterations(10), 1.0).unwrap();
        assert_eq!(r.final_solution, DVector::from_vec(vec![3.0, 0.0]));
    }

    #[test]
    fn huge_step_diverges() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        let f = LeastSquares::new(a, DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let err = iht(&f, &SolverConfig::new(2).with_max_iterations(5000), 50.0).unwrap_err();
        assert!(matches!(err, Error::Diverged { eta } if eta == 50.0));
    }

    #[test]
    fn rejects_bad_step() {
        let f = LeastSquares::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert!(iht(&f, &SolverConfig::new(1), 0.0).is_err());
    }

    #[test]
    fn default_step_is_inverse_column_norm() {
        let f = LeastSquares::new(DMatrix::identity(3, 3) * 2.0, DVector::zeros(3)).unwrap();
        assert_eq!(default_step(&f).unwrap(), 0.25);
    }
}
