use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsekit::analysis::brute_force_best_sparse;
use sparsekit::instances::gaussian_planted;
use sparsekit::solvers::{
    arht, default_step, exhaustive_local_search, iht, lasso_path, lasso_solve, omp, ompr, Init, LassoSearch,
};
use sparsekit::{LeastSquares, Objective, SolverConfig, SupportSet};

fn random_ls(seed: u64, m: usize, n: usize) -> LeastSquares {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    LeastSquares::new(a, b).unwrap()
}

#[test]
fn omp_never_beats_exhaustive_enumeration() {
    for seed in 0..10 {
        let f = random_ls(seed, 10, 6);
        let (_, best) = brute_force_best_sparse(&f, 3).unwrap();
        let r = omp(&f, &SolverConfig::new(3)).unwrap();
        assert!(r.final_value >= best - 1e-10);
    }
}

#[test]
fn every_solver_is_bounded_by_the_best_two_sparse_value() {
    let f = random_ls(21, 8, 6);
    let (_, best) = brute_force_best_sparse(&f, 2).unwrap();
    let cfg = SolverConfig::new(2).with_seed(5);
    let values = [
        omp(&f, &cfg).unwrap().final_value,
        ompr(&f, &cfg).unwrap().final_value,
        exhaustive_local_search(&f, &cfg).unwrap().final_value,
        iht(&f, &cfg, default_step(&f).unwrap()).unwrap().final_value,
        arht(&f, &cfg).unwrap().final_value,
        lasso_path(&f, &cfg, &LassoSearch::default()).unwrap().final_value,
    ];
    for v in values {
        assert!(best <= v + 1e-10);
    }
}

#[test]
fn iht_loss_is_monotone_after_the_first_step() {
    let inst = gaussian_planted(40, 100, 3, 0.0, 8).unwrap();
    let f = &inst.objective;
    let rho_plus = f.max_column_norm_sq();
    let r = iht(f, &SolverConfig::new(3).with_max_iterations(300), 1.0 / rho_plus).unwrap();
    let values: Vec<f64> = r.trace.iter().map(|t| t.value).collect();
    for w in values[1..].windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    }
}

#[test]
fn els_matches_or_beats_ompr_from_the_same_start() {
    // Only the single step is dominated; from the leading start OMPR occasionally
    // settles in a better local optimum, so the paired runs start from OMP.
    for seed in 0..20 {
        let f = random_ls(100 + seed, 12, 8);
        let cfg = SolverConfig::new(3).with_init(Init::Omp);
        let e = exhaustive_local_search(&f, &cfg).unwrap();
        let o = ompr(&f, &cfg).unwrap();
        assert!(e.final_value <= o.final_value + 1e-10, "seed {seed}");
    }
}

#[test]
fn ompr_recovers_noiseless_planted_supports() {
    let mut recovered = 0;
    for seed in 0..20 {
        let inst = gaussian_planted(100, 256, 8, 0.0, seed).unwrap();
        let r = ompr(&inst.objective, &SolverConfig::new(8)).unwrap();
        if r.final_value <= 1e-10 {
            recovered += 1;
        }
    }
    assert!(recovered >= 18, "{recovered}/20");
}

#[test]
fn lasso_solution_satisfies_subgradient_conditions() {
    let f = random_ls(77, 20, 10);
    let lambda = 0.1;
    let search = LassoSearch {
        tol: 1e-13,
        ..LassoSearch::default()
    };
    let x = lasso_solve(&f, lambda, &SupportSet::new(), None, &search).unwrap();
    let g = f.gradient(&x);
    let residual = (0..10)
        .map(|i| {
            if x[i] != 0.0 {
                (g[i] + lambda * x[i].signum()).abs()
            } else {
                (g[i].abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    assert!(residual <= 1e-6, "{residual}");
}

#[test]
fn arht_search_interval_brackets_the_sparse_optimum() {
    for seed in 0..10 {
        let f = random_ls(300 + seed, 10, 8);
        let (_, best) = brute_force_best_sparse(&f, 1).unwrap();
        let r = arht(&f, &SolverConfig::new(4).with_seed(seed).with_epsilon(1e-4)).unwrap();
        let d = r.arht.unwrap();
        // r may drop below l: the solution is 4-sparse, l only bounds the 1-sparse optimum
        for &(l, _) in &d.intervals {
            assert!(l <= best + 1e-10, "lower end {l} above optimum {best}");
        }
        for w in d.intervals.windows(2) {
            let (before, after) = (w[0].1 - w[0].0, w[1].1 - w[1].0);
            assert!(after <= 5.0 / 6.0 * before + 1e-12);
        }
    }
}

#[test]
fn arht_strict_mode_reaches_planted_optimum() {
    let inst = gaussian_planted(60, 40, 3, 0.0, 4).unwrap();
    let cfg = SolverConfig::new(12).strict().with_epsilon(1e-6).with_seed(2);
    let r = arht(&inst.objective, &cfg).unwrap();
    assert!(r.final_value <= 1e-6);
    assert!(r.final_support.len() <= 12);
}
