use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::Objective;
use crate::report::{Flag, SolverReport, StepKind};
use crate::support::{support_of, DenseVector, SupportSet};

use super::SolverConfig;

/// Controls the outer bisection over the ℓ₁ weight and the inner proximal solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LassoSearch {
    /// `λ_min = ratio · λ_max`.
    pub lambda_min_ratio: f64,
    pub bisection_steps: usize,
    /// Stop the proximal solver once the gradient-mapping step falls below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for LassoSearch {
    fn default() -> Self {
        LassoSearch {
            lambda_min_ratio: 1e-8,
            bisection_steps: 50,
            tol: 1e-10,
            max_iterations: 200_000,
        }
    }
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Minimizes `f(x) + λ‖x_{¬P}‖₁` by accelerated proximal gradient with adaptive
/// restart. Pinned coordinates `P` are not penalized.
pub fn lasso_solve<F: Objective + ?Sized>(
    f: &F,
    lambda: f64,
    pinned: &SupportSet,
    start: Option<&DenseVector>,
    search: &LassoSearch,
) -> Result<DenseVector> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("l1 weight must be nonnegative, got {lambda}")));
    }
    let n = f.dim();
    let lip = f
        .lipschitz_bound()
        .ok_or_else(|| invalid("objective has no gradient Lipschitz bound"))?
        .max(f64::MIN_POSITIVE);
    let step = 1.0 / lip;
    let prox = |z: &DenseVector| -> DenseVector {
        DenseVector::from_fn(n, |i, _| {
            if pinned.contains(i) {
                z[i]
            } else {
                soft(z[i], lambda * step)
            }
        })
    };
    let mut x = start.cloned().unwrap_or_else(|| DenseVector::zeros(n));
    let mut y = x.clone();
    let mut theta = 1.0f64;
    for _ in 0..search.max_iterations {
        let next = prox(&(&y - f.gradient(&y) * step));
        let moved = (&next - &y).amax() * lip;
        // restart momentum when it points uphill
        let restart = (&y - &next).dot(&(&next - &x)) > 0.0;
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        if restart {
            y = next.clone();
            theta = 1.0;
        } else {
            y = &next + (&next - &x) * ((theta - 1.0) / theta_next);
            theta = theta_next;
        }
        x = next;
        if moved <= search.tol {
            break;
        }
    }
    Ok(x)
}

/// ℓ₁ baseline at a target sparsity: bisection over `λ ∈ [λ_min, λ_max]` until the
/// solution has `s` nonzeros (pinned included), then a restricted re-fit on that
/// support.
pub fn lasso_path<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig, search: &LassoSearch) -> Result<SolverReport> {
    let n = f.dim();
    cfg.validate(n)?;
    if cfg.sparsity == 0 {
        return Err(invalid("lasso target sparsity must be at least 1"));
    }
    let mut report = SolverReport::new("lasso", n, cfg.rng_seed);
    let base = f.restricted_minimize(&cfg.pinned, cfg.inner_tol);
    report.absorb(base.flags);
    report.push(0, &cfg.pinned, base.value, StepKind::Init);
    let g0 = f.gradient(&base.x);
    let lambda_max = (0..n)
        .filter(|&i| !cfg.pinned.contains(i))
        .map(|i| g0[i].abs())
        .fold(0.0, f64::max);
    let target = cfg.sparsity - cfg.pinned.len();

    let free_count = |x: &DenseVector| -> usize {
        support_of(x, 0.0).iter().filter(|&i| !cfg.pinned.contains(i)).count()
    };

    let mut chosen: Option<SupportSet> = None;
    // best strictly-below-target support seen so far
    let mut below: (usize, SupportSet) = (0, cfg.pinned.clone());
    if target == 0 || lambda_max == 0.0 {
        chosen = Some(cfg.pinned.clone());
    } else {
        let (mut lo, mut hi) = (search.lambda_min_ratio * lambda_max, lambda_max);
        let mut warm = base.x.clone();
        for t in 1..=search.bisection_steps {
            let mid = (lo * hi).sqrt();
            let x = lasso_solve(f, mid, &cfg.pinned, Some(&warm), search)?;
            let k = free_count(&x);
            let supp = support_of(&x, 0.0).union(&cfg.pinned);
            report.push(t, &supp, f.value(&x), StepKind::Update);
            report.iterations = t;
            if k == target {
                chosen = Some(supp);
                break;
            }
            if k > target {
                lo = mid;
            } else {
                if k >= below.0 {
                    below = (k, supp);
                }
                hi = mid;
            }
            warm = x;
        }
    }
    let support = match chosen {
        Some(s) => s,
        None => {
            report.flags.insert(Flag::SparsityBelowTarget);
            below.1
        }
    };
    let refit = f.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(refit.flags);
    report.flags.insert(Flag::Debiased);
    let value = refit.value;
    report.finish(refit.x, support, value);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquares;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn large_weight_gives_zero() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let f = LeastSquares::new(a, b).unwrap();
        let lmax = f.gradient(&DVector::zeros(2)).amax();
        let x = lasso_solve(&f, lmax, &SupportSet::new(), None, &LassoSearch::default()).unwrap();
        assert_eq!(x, DVector::zeros(2));
    }

    #[test]
    fn orthonormal_design_is_soft_threshold() {
        let a = DMatrix::<f64>::identity(4, 4);
        let b = DVector::from_vec(vec![3.0, -0.5, 1.5, -2.0]);
        let f = LeastSquares::new(a, b.clone()).unwrap();
        let x = lasso_solve(&f, 1.0, &SupportSet::new(), None, &LassoSearch::default()).unwrap();
        let expect = b.map(|v| soft(v, 1.0));
        assert!((x - expect).amax() < 1e-12);
    }

    #[test]
    fn path_hits_target_sparsity_and_debiases() {
        let a = DMatrix::<f64>::identity(4, 4);
        let b = DVector::from_vec(vec![3.0, -0.5, 1.5, -2.0]);
        let f = LeastSquares::new(a, b).unwrap();
        let r = lasso_path(&f, &SolverConfig::new(2), &LassoSearch::default()).unwrap();
        assert_eq!(r.final_support.as_slice(), &[0, 3]);
        assert_eq!(r.final_solution[0], 3.0);
        assert!(r.has(Flag::Debiased));
        assert!(!r.has(Flag::SparsityBelowTarget));
    }

    #[test]
    fn unreachable_sparsity_is_flagged() {
        // two identical magnitudes enter together, so exactly one nonzero is impossible
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![2.0, -2.0, 0.0]);
        let f = LeastSquares::new(a, b).unwrap();
        let r = lasso_path(&f, &SolverConfig::new(1), &LassoSearch::default()).unwrap();
        assert!(r.has(Flag::SparsityBelowTarget));
        assert!(r.final_support.is_empty());
    }
}
