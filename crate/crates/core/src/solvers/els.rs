use crate::error::Result;
use crate::objective::Objective;
use crate::report::{Flag, SolverReport, StepKind};
use crate::support::{argmin_by, DenseVector, SupportSet};

use super::{finish_with, improves, initial_support, removable, SolverConfig, SwapProposal};

/// The exhaustive move: drop the smallest `x_j²` (unpinned) and try every entrant,
/// keeping the one whose restricted minimum is lowest.
pub fn els_step<F: Objective + ?Sized>(
    f: &F,
    support: &SupportSet,
    x: &DenseVector,
    pinned: &SupportSet,
    tol: f64,
) -> Option<SwapProposal> {
    let n = f.dim();
    let remove = argmin_by(removable(support, pinned), |j| x[j] * x[j])?;
    let mut best: Option<SwapProposal> = None;
    for insert in (0..n).filter(|&i| !support.contains(i)) {
        let next = support.swapped(insert, remove);
        let solution = f.restricted_minimize(&next, tol);
        let better = match &best {
            None => true,
            Some(b) => solution.value < b.solution.value,
        };
        if better {
            best = Some(SwapProposal {
                insert,
                remove,
                support: next,
                solution,
            });
        }
    }
    best
}

/// Exhaustive local search. Each iteration costs `n − s` restricted solves.
pub fn exhaustive_local_search<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = f.dim();
    cfg.validate(n)?;
    let mut report = SolverReport::new("els", n, cfg.rng_seed);
    let mut support = initial_support(f, cfg)?;
    let mut sol = f.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(sol.flags);
    report.push(0, &support, sol.value, StepKind::Init);

    let mut t = 0;
    loop {
        if t >= cfg.max_iterations {
            report.flags.insert(Flag::IterationCap);
            break;
        }
        let Some(prop) = els_step(f, &support, &sol.x, &cfg.pinned, cfg.inner_tol) else {
            break;
        };
        if !improves(prop.solution.value, sol.value) {
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
    use crate::solvers::{ompr_step, Init};
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn optimal_start_is_fixed_point() {
        let f = LeastSquares::new(DMatrix::identity(4, 4), DVector::from_vec(vec![3.0, 0.1, 2.0, 0.2])).unwrap();
        let cfg = SolverConfig::new(2).with_init(Init::Given(SupportSet::from_indices([0, 2])));
        let r = exhaustive_local_search(&f, &cfg).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.final_support.as_slice(), &[0, 2]);
    }

    #[test]
    fn one_step_dominates_ompr() {
        for seed in 0..10 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(12, 8, |_, _| StandardNormal.sample(&mut rng));
            let b = DVector::from_fn(12, |_, _| StandardNormal.sample(&mut rng));
            let f = LeastSquares::new(a, b).unwrap();
            let s = SupportSet::leading(3);
            let x = f.restricted_minimize(&s, 1e-10).x;
            let pinned = SupportSet::new();
            let e = els_step(&f, &s, &x, &pinned, 1e-10).unwrap();
            let o = ompr_step(&f, &s, &x, &pinned, 1e-10).unwrap();
            assert_eq!(e.remove, o.remove);
            assert!(e.solution.value <= o.solution.value + 1e-12);
        }
    }
}
