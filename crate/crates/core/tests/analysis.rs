use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsekit::analysis::{
    brute_force_restricted_constants, brute_force_rho2_plus, check_solution_recovery, check_support_recovery,
    compute_rgoc, rip_tradeoff_bound, verify_ompr_progress, ProgressCase, Verdict, DEFAULT_THETA,
};
use sparsekit::instances::gaussian_planted;
use sparsekit::solvers::{arht, ompr, Init};
use sparsekit::{estimate_rho2_plus, LeastSquares, Objective, SolverConfig, SupportSet, DEFAULT_INNER_TOL};

fn random_ls(seed: u64, m: usize, n: usize) -> LeastSquares {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    LeastSquares::new(a, b).unwrap()
}

#[test]
fn restricted_constants_behave_monotonically_in_the_level() {
    for seed in 0..5 {
        let f = random_ls(seed, 12, 7);
        let mut last_delta = 0.0;
        for level in 1..=7 {
            let c = brute_force_restricted_constants(&f, level).unwrap();
            assert!(c.delta >= last_delta - 1e-12, "level {level}");
            last_delta = c.delta;
            if level >= 2 {
                assert!(c.kappa_tilde <= c.kappa + 1e-12);
            }
        }
    }
}

#[test]
fn rho2_estimate_dominates_pairwise_enumeration() {
    for seed in 0..10 {
        let f = random_ls(50 + seed, 8, 5);
        let est = estimate_rho2_plus(&f, None).unwrap();
        assert!(est >= brute_force_rho2_plus(&f).unwrap() - 1e-12);
    }
}

#[test]
fn rip_bound_grows_with_the_sparsity_ratio() {
    let mut last = 0.0;
    for ratio in 1..=40 {
        let d = rip_tradeoff_bound(ratio * 3, 3, DEFAULT_THETA).unwrap();
        assert!(d > last && d < 1.0);
        last = d;
    }
}

#[test]
fn rgoc_is_non_decreasing_in_the_level() {
    let inst = gaussian_planted(30, 20, 3, 0.4, 9).unwrap();
    let mut last = 0.0;
    for level in 0..=20 {
        let z = compute_rgoc(&inst.objective, &inst.x_star, level).unwrap();
        assert!(z >= last);
        last = z;
    }
}

#[test]
fn noiseless_supports_are_recovered_by_ompr_and_arht() {
    for seed in 0..20 {
        let inst = gaussian_planted(40, 30, 3, 0.0, seed).unwrap();
        let f = &inst.objective;
        let zeta = compute_rgoc(f, &inst.x_star, 6).unwrap();
        let rho_minus = 0.5;
        for x in [
            ompr(f, &SolverConfig::new(3)).unwrap().final_solution,
            arht(f, &SolverConfig::new(3).with_seed(seed)).unwrap().final_solution,
        ] {
            let a = check_support_recovery(&x, &inst.x_star, zeta, rho_minus).unwrap();
            assert!(a.condition_satisfied);
            assert_eq!(a.verdict(), Verdict::Satisfied, "seed {seed}");
        }
    }
}

#[test]
fn arht_output_meets_the_distance_bound() {
    let inst = gaussian_planted(50, 24, 3, 0.0, 31).unwrap();
    let f = &inst.objective;
    let eps = 1e-6;
    let r = arht(f, &SolverConfig::new(6).with_epsilon(eps).with_seed(1)).unwrap();
    let level = (inst.support().union(&r.final_support)).len();
    let rho_minus = brute_force_restricted_constants(f, level).unwrap().rho_minus;
    let a = check_solution_recovery(f, &r.final_solution, &inst.x_star, rho_minus, eps, None).unwrap();
    assert!(a.condition_satisfied);
    assert!(a.holds, "{a:?}");
}

#[test]
fn noisy_instance_without_a_margin_is_not_judged() {
    let inst = gaussian_planted(20, 10, 2, 5.0, 3).unwrap();
    let f = &inst.objective;
    let zeta = compute_rgoc(f, &inst.x_star, 4).unwrap();
    let x = ompr(f, &SolverConfig::new(2)).unwrap().final_solution;
    let a = check_support_recovery(&x, &inst.x_star, zeta, 0.1).unwrap();
    assert_eq!(a.verdict(), Verdict::ConditionUnsatisfied);
}

#[test]
fn scaled_column_exercises_the_tight_ill_conditioned_case() {
    let mut checked = 0;
    for seed in 0..20 {
        let inst = gaussian_planted(16, 8, 2, 0.0, 200 + seed).unwrap();
        let mut a = inst.objective.design().clone();
        // inflate one off-target column to push rho2+ up
        let victim = (0..8).find(|&j| inst.x_star[j] == 0.0).unwrap();
        a.column_mut(victim).scale_mut(3.0);
        let f = LeastSquares::new(a, inst.objective.target().clone()).unwrap();
        let (s, s_star) = (3, 2);
        let rho2 = brute_force_rho2_plus(&f).unwrap();
        let rho_minus = brute_force_restricted_constants(&f, s + s_star).unwrap().rho_minus;
        let rep = ompr(&f, &SolverConfig::new(s).with_init(Init::Leading)).unwrap();
        for entry in &rep.trace {
            let x = f.restricted_minimize(&entry.support, DEFAULT_INNER_TOL).x;
            let check =
                verify_ompr_progress(&f, &entry.support, &x, &inst.x_star, rho2, rho_minus, DEFAULT_INNER_TOL, 1e-9)
                    .unwrap();
            assert!(check.holds, "seed {seed}: {check:?}");
            if check.case == ProgressCase::IllConditionedTight {
                assert!(check.mu * check.kappa_tilde > 1.0);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn well_conditioned_steps_contract_by_the_simple_factor() {
    let mut checked = 0;
    for seed in 0..30 {
        let inst = gaussian_planted(400, 8, 1, 0.0, 500 + seed).unwrap();
        let f = &inst.objective;
        let s = 6;
        let rho2 = brute_force_rho2_plus(f).unwrap();
        let rho_minus = brute_force_restricted_constants(f, s + 1).unwrap().rho_minus;
        let start = SupportSet::from_indices((0..8).filter(|&j| inst.x_star[j] == 0.0).take(s));
        let rep = ompr(f, &SolverConfig::new(s).with_init(Init::Given(start))).unwrap();
        for entry in &rep.trace {
            let x = f.restricted_minimize(&entry.support, DEFAULT_INNER_TOL).x;
            let check = verify_ompr_progress(f, &entry.support, &x, &inst.x_star, rho2, rho_minus, DEFAULT_INNER_TOL, 1e-9)
                .unwrap();
            assert!(check.holds);
            if check.case == ProgressCase::WellConditioned {
                assert!((check.factor - (1.0 - check.mu / check.missing as f64)).abs() < 1e-12);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn objective_trait_object_works_for_rgoc() {
    let f = random_ls(4, 6, 4);
    let dynf: &dyn Objective = &f;
    let x = DVector::zeros(4);
    assert!((compute_rgoc(dynf, &x, 4).unwrap() - f.gradient(&x).norm()).abs() < 1e-15);
}
