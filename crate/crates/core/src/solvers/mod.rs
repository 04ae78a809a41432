//! IHT, OMP, OMPR, exhaustive local search, ARHT and an ℓ₁ baseline.

mod arht;
mod els;
mod iht;
mod lasso;
mod omp;
mod ompr;

pub use arht::{
    arht, arht_core, arht_robust, core_iteration_budget, repetition_count,
    sample_unregularize_index,
};
pub use els::{els_step, exhaustive_local_search};
pub use iht::{default_step, iht};
pub use lasso::{lasso_path, lasso_solve, LassoSearch};
pub use omp::omp;
pub use ompr::{ompr, ompr_step, SwapProposal};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::{Objective, RestrictedSolution, DEFAULT_INNER_TOL};
use crate::report::SolverReport;
use crate::support::{support_of, DenseVector, SupportSet, DEFAULT_ZERO_TOL};

/// Core runs per target value under [`SolverConfig::benchmark`].
pub const BENCHMARK_REPETITIONS: usize = 20;

/// How replacement-based solvers pick their starting support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// OMP solution at the same sparsity.
    #[default]
    Omp,
    /// The literal `{0, ..., s-1}` start.
    Leading,
    /// A caller-supplied support of size `s`.
    Given(SupportSet),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Output sparsity, pinned coordinates included.
    pub sparsity: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub rng_seed: u64,
    /// Fraction `c` in the Type-1 test `g(x^t) − g(x^{t+1}) ≥ (c/s)(g(x^t) − opt)`.
    pub progress_fraction: f64,
    pub inner_tol: f64,
    pub init: Init,
    /// Coordinates forced into every support and never swapped out (e.g. an intercept).
    pub pinned: SupportSet,
    /// OMPR: keep swapping for exactly `max_iterations` steps, ignoring non-improvement.
    pub run_exactly_t: bool,
    /// ARHT: stop a core run once half the support is unregularized and progress stalls.
    pub early_stop_heuristic: bool,
    /// ARHT: regularization weight; defaults to the `ρ₂⁺` bound of the objective.
    pub weight: Option<f64>,
    /// ARHT: override for the number of core runs per robust call.
    pub repetitions: Option<usize>,
}

impl SolverConfig {
    pub fn new(sparsity: usize) -> Self {
        SolverConfig {
            sparsity,
            epsilon: 1e-6,
            max_iterations: 10_000,
            rng_seed: 0,
            progress_fraction: 1e-3,
            inner_tol: DEFAULT_INNER_TOL,
            init: Init::Omp,
            pinned: SupportSet::new(),
            run_exactly_t: false,
            early_stop_heuristic: false,
            weight: None,
            repetitions: None,
        }
    }

    /// Theoretical mode: progress fraction 1 and no early-stop heuristic.
    pub fn strict(mut self) -> Self {
        self.progress_fraction = 1.0;
        self.early_stop_heuristic = false;
        self
    }

    /// Settings used for benchmark sweeps: 20 core runs per target value and the
    /// half-unregularized stopping rule.
    pub fn benchmark(mut self) -> Self {
        self.progress_fraction = 1e-3;
        self.early_stop_heuristic = true;
        self.repetitions = Some(BENCHMARK_REPETITIONS);
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_max_iterations(mut self, t: usize) -> Self {
        self.max_iterations = t;
        self
    }

    pub fn with_pinned(mut self, pinned: SupportSet) -> Self {
        self.pinned = pinned;
        self
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if self.sparsity > n {
            return Err(invalid(format!("sparsity {} exceeds dimension {n}", self.sparsity)));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.progress_fraction > 0.0 && self.progress_fraction <= 1.0) {
            return Err(invalid(format!(
                "progress fraction must lie in (0, 1], got {}",
                self.progress_fraction
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(invalid("inner tolerance must be positive"));
        }
        self.pinned.check_bounds(n)?;
        if self.pinned.len() > self.sparsity {
            return Err(invalid(format!(
                "{} pinned coordinates do not fit in sparsity {}",
                self.pinned.len(),
                self.sparsity
            )));
        }
        if let Init::Given(s) = &self.init {
            s.check_bounds(n)?;
            if s.len() != self.sparsity {
                return Err(invalid(format!(
                    "initial support has {} indices, expected {}",
                    s.len(),
                    self.sparsity
                )));
            }
            if !self.pinned.is_subset(s) {
                return Err(invalid("initial support must contain the pinned coordinates"));
            }
        }
        Ok(())
    }
}

/// Resolves `cfg.init` into a concrete support of size `s`.
pub(crate) fn initial_support<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig) -> Result<SupportSet> {
    match &cfg.init {
        Init::Given(s) => Ok(s.clone()),
        Init::Leading => {
            let mut s = cfg.pinned.clone();
            let mut i = 0;
            while s.len() < cfg.sparsity {
                s.insert(i);
                i += 1;
            }
            Ok(s)
        }
        Init::Omp => {
            let warm = SolverConfig {
                init: Init::Omp,
                ..cfg.clone()
            };
            Ok(omp(f, &warm)?.final_support)
        }
    }
}

/// Swap candidates that may leave the support.
pub(crate) fn removable<'a>(support: &'a SupportSet, pinned: &'a SupportSet) -> impl Iterator<Item = usize> + 'a {
    support.iter().filter(move |&j| !pinned.contains(j))
}

/// Relative slack used when deciding whether a candidate strictly improves.
pub(crate) fn improves(new: f64, old: f64) -> bool {
    new < old - 1e-14 * (1.0 + old.abs())
}

pub(crate) fn finish_with(report: &mut SolverReport, sol: RestrictedSolution, support: SupportSet, value: f64) {
    report.absorb(sol.flags);
    report.finish(sol.x, support, value);
}

/// Support of a returned vector, used by tests and the sweep harness.
pub fn nonzero_support(x: &DenseVector) -> SupportSet {
    support_of(x, DEFAULT_ZERO_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(3).validate(2).is_err());
        assert!(SolverConfig::new(2).with_epsilon(0.0).validate(4).is_err());
        let mut c = SolverConfig::new(2);
        c.progress_fraction = 1.5;
        assert!(c.validate(4).is_err());
        let c = SolverConfig::new(1).with_pinned(SupportSet::from_indices([0, 1]));
        assert!(c.validate(4).is_err());
        let c = SolverConfig::new(2).with_init(Init::Given(SupportSet::from_indices([0])));
        assert!(c.validate(4).is_err());
        assert!(SolverConfig::new(2).validate(4).is_ok());
        let s = SolverConfig::new(2).strict();
        assert_eq!(s.progress_fraction, 1.0);
        let b = SolverConfig::new(2).benchmark();
        assert!(b.early_stop_heuristic);
        assert_eq!(b.repetitions, Some(BENCHMARK_REPETITIONS));
    }
}
