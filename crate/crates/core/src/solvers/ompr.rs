use crate::error::Result;
use crate::objective::{Objective, RestrictedSolution};
use crate::report::{Flag, SolverReport, StepKind};
use crate::support::{argmax_by, argmin_by, DenseVector, SupportSet};

use super::{finish_with, improves, initial_support, removable, SolverConfig};

/// One candidate swap `S ∪ {insert} \ {remove}` with its restricted minimizer.
#[derive(Clone, Debug)]
pub struct SwapProposal {
    pub insert: usize,
    pub remove: usize,
    pub support: SupportSet,
    pub solution: RestrictedSolution,
}

/// The OMPR move from `x` (an `S`-restricted minimizer): insert the largest
/// gradient entry outside `S`, drop the smallest-magnitude unpinned entry of `S`.
///
/// Returns `None` when either side of the swap has no candidate.
pub fn ompr_step<F: Objective + ?Sized>(
    f: &F,
    support: &SupportSet,
    x: &DenseVector,
    pinned: &SupportSet,
    tol: f64,
) -> Option<SwapProposal> {
    let n = f.dim();
    let g = f.gradient(x);
    let insert = argmax_by((0..n).filter(|&i| !support.contains(i)), |i| g[i].abs())?;
    let remove = argmin_by(removable(support, pinned), |j| x[j].abs())?;
    let next = support.swapped(insert, remove);
    let solution = f.restricted_minimize(&next, tol);
    Some(SwapProposal {
        insert,
        remove,
        support: next,
        solution,
    })
}

/// Orthogonal matching pursuit with replacement.
///
/// Stops at the first swap that fails to lower `f` and returns the last improving
/// iterate. With `cfg.run_exactly_t` every swap is committed for exactly
/// `cfg.max_iterations` steps instead.
pub fn ompr<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = f.dim();
    cfg.validate(n)?;
    let mut report = SolverReport::new("ompr", n, cfg.rng_seed);
    let mut support = initial_support(f, cfg)?;
    let mut sol = f.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(sol.flags);
    report.push(0, &support, sol.value, StepKind::Init);

    let mut t = 0;
    loop {
        if t >= cfg.max_iterations {
            if !cfg.run_exactly_t {
                report.flags.insert(Flag::IterationCap);
            }
            break;
        }
        let Some(prop) = ompr_step(f, &support, &sol.x, &cfg.pinned, cfg.inner_tol) else {
            break;
        };
        if !cfg.run_exactly_t && !improves(prop.solution.value, sol.value) {
            break;
        }
        t += 1;
        support = prop.support;
        sol = prop.solution;
        report.absorb(sol.flags);
        report.push(t, &support, sol.value, StepKind::InsertRemove);
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
    use crate::solvers::Init;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn optimal_start_terminates_unchanged() {
        let f = LeastSquares::new(DMatrix::identity(4, 4), DVector::from_vec(vec![3.0, 0.1, 2.0, 0.2])).unwrap();
        let cfg = SolverConfig::new(2).with_init(Init::Given(SupportSet::from_indices([0, 2])));
        let r = ompr(&f, &cfg).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.final_support.as_slice(), &[0, 2]);
        assert_eq!(r.final_solution, DVector::from_vec(vec![3.0, 0.0, 2.0, 0.0]));
    }

    #[test]
    fn swaps_out_of_a_bad_start() {
        let f = LeastSquares::new(DMatrix::identity(4, 4), DVector::from_vec(vec![0.1, 0.2, 2.0, 3.0])).unwrap();
        let cfg = SolverConfig::new(2).with_init(Init::Leading);
        let r = ompr(&f, &cfg).unwrap();
        assert_eq!(r.final_support.as_slice(), &[2, 3]);
        assert_eq!(r.iterations, 2);
        for w in r.trace.windows(2) {
            assert!(w[1].value < w[0].value);
        }
    }

    #[test]
    fn run_exactly_t_commits_every_swap() {
        let f = LeastSquares::new(DMatrix::identity(3, 3), DVector::from_vec(vec![1.0, 1.0, 1.0])).unwrap();
        let mut cfg = SolverConfig::new(1).with_init(Init::Leading).with_max_iterations(5);
        cfg.run_exactly_t = true;
        let r = ompr(&f, &cfg).unwrap();
        assert_eq!(r.iterations, 5);
        assert_eq!(r.trace.len(), 6);
        assert!(!r.has(Flag::IterationCap));
    }

    #[test]
    fn pinned_index_never_leaves() {
        let f = LeastSquares::new(DMatrix::identity(3, 3), DVector::from_vec(vec![0.01, 1.0, 2.0])).unwrap();
        let cfg = SolverConfig::new(2)
            .with_pinned(SupportSet::from_indices([0]))
            .with_init(Init::Given(SupportSet::from_indices([0, 1])));
        let r = ompr(&f, &cfg).unwrap();
        assert_eq!(r.final_support.as_slice(), &[0, 2]);
    }
}
