use crate::error::Result;
use crate::objective::Objective;
use crate::report::{SolverReport, StepKind};
use crate::support::argmax_by;

use super::{finish_with, SolverConfig};

/// Orthogonal matching pursuit: grow the support by the largest gradient entry,
/// re-solving on the enlarged support each time.
///
/// Pinned coordinates seed the support and count towards `cfg.sparsity`.
pub fn omp<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = f.dim();
    cfg.validate(n)?;
    let mut report = SolverReport::new("omp", n, cfg.rng_seed);
    let mut support = cfg.pinned.clone();
    let mut sol = f.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(sol.flags);
    report.push(0, &support, sol.value, StepKind::Init);

    let mut t = 0;
    while support.len() < cfg.sparsity {
        let g = f.gradient(&sol.x);
        let i = argmax_by((0..n).filter(|&i| !support.contains(i)), |i| g[i].abs())
            .expect("sparsity below dimension leaves a candidate");
        support.insert(i);
        sol = f.restricted_minimize(&support, cfg.inner_tol);
        report.absorb(sol.flags);
        t += 1;
        report.push(t, &support, sol.value, StepKind::Insert);
    }
    report.iterations = t;
    let value = sol.value;
    finish_with(&mut report, sol, support, value);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquares;
    use crate::support::SupportSet;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn orthonormal_design_recovers_support() {
        let a = DMatrix::<f64>::identity(5, 5);
        let b = a.column(0) * 2.0 + a.column(3) * 1.0;
        let f = LeastSquares::new(a, b).unwrap();
        let r = omp(&f, &SolverConfig::new(2)).unwrap();
        assert_eq!(r.final_support.as_slice(), &[0, 3]);
        assert!(r.final_value <= 1e-18);
    }

    #[test]
    fn zero_sparsity_gives_zero() {
        let f = LeastSquares::new(DMatrix::identity(3, 3), DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        let r = omp(&f, &SolverConfig::new(0)).unwrap();
        assert_eq!(r.final_solution, DVector::zeros(3));
        assert!(r.final_support.is_empty());
    }

    #[test]
    fn pinned_coordinate_is_kept() {
        let f = LeastSquares::new(DMatrix::identity(3, 3), DVector::from_vec(vec![0.0, 2.0, 3.0])).unwrap();
        let cfg = SolverConfig::new(2).with_pinned(SupportSet::from_indices([0]));
        let r = omp(&f, &cfg).unwrap();
        assert_eq!(r.final_support.as_slice(), &[0, 2]);
    }

    #[test]
    fn support_grows_by_one_and_loss_never_increases() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let a = DMatrix::from_fn(12, 9, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_fn(12, |_, _| StandardNormal.sample(&mut rng));
        let f = LeastSquares::new(a, b).unwrap();
        let r = omp(&f, &SolverConfig::new(6)).unwrap();
        for w in r.trace.windows(2) {
            assert_eq!(w[1].support.len(), w[0].support.len() + 1);
            assert!(w[1].value <= w[0].value + 1e-12);
        }
    }
}
