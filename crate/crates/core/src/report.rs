//! Solver output: final solution plus a per-iteration trace.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::objective::SolveFlags;
use crate::support::{DenseVector, SupportSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// Starting point, before any update.
    Init,
    /// Regularized swap that made enough progress.
    Type1,
    /// Rejected swap followed by unregularization of one index.
    Type2,
    /// One index in, one index out.
    InsertRemove,
    /// One index in (OMP).
    Insert,
    /// Full-vector update (IHT, proximal gradient).
    Update,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::Init => "init",
            StepKind::Type1 => "type1",
            StepKind::Type2 => "type2",
            StepKind::InsertRemove => "insert-remove",
            StepKind::Insert => "insert",
            StepKind::Update => "update",
        };
        f.write_str(s)
    }
}

/// Conditions worth surfacing to the caller. Recorded, never fatal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    RankDeficient,
    Capped,
    InnerNotConverged,
    /// ARHT core hit a Type-2 step with `‖x_R‖₂ = 0`.
    Stalled,
    /// ARHT core found a support whose restricted minimum is at most `opt`.
    EarlyExit,
    /// ARHT core stopped on the half-unregularized heuristic.
    EarlyStopHeuristic,
    /// `max_iterations` truncated the run.
    IterationCap,
    /// Solution re-fit on its own support after an ℓ₁ path.
    Debiased,
    /// No ℓ₁ weight produced the requested sparsity; the nearest smaller one was kept.
    SparsityBelowTarget,
    /// A sweep cell failed; see the error message.
    Failed,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flag::RankDeficient => "rank_deficient",
            Flag::Capped => "capped",
            Flag::InnerNotConverged => "inner_not_converged",
            Flag::Stalled => "stalled",
            Flag::EarlyExit => "early_exit",
            Flag::EarlyStopHeuristic => "early_stop_heuristic",
            Flag::IterationCap => "iteration_cap",
            Flag::Debiased => "debiased",
            Flag::SparsityBelowTarget => "sparsity_below_target",
            Flag::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// Bookkeeping for one ARHT iteration, enough to re-check its acceptance rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegStep {
    pub kind: StepKind,
    /// `g_{R^t}(x^t)`.
    pub g_before: f64,
    /// Type 1: `g_{R^t}(x^{t+1})`. Type 2: `g_{R^{t+1}}(x^{t+1})`.
    pub g_after: f64,
    /// `g_{R^t}` at the rejected swap (Type 2 only).
    pub g_proposal: Option<f64>,
    pub opt: f64,
    /// `(progress_fraction / s)·(g_before − opt)`.
    pub required_progress: f64,
    /// `|R ∩ S|` before the step.
    pub reg_overlap: usize,
    /// `|R|` before the step.
    pub reg_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub support: SupportSet,
    /// Objective `f` at the iterate.
    pub value: f64,
    pub kind: StepKind,
    /// ARHT only.
    pub reg: Option<RegStep>,
}

/// Extra diagnostics gathered by the ARHT driver across all of its core runs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ArhtDiagnostics {
    /// `(l, r)` before each binary-search step, plus the final pair.
    pub intervals: Vec<(f64, f64)>,
    /// Repetitions per robust call.
    pub repetitions: usize,
    pub core_runs: usize,
    pub successful_cores: usize,
    /// Every ARHT iteration of every core run, in execution order.
    pub steps: Vec<RegStep>,
    /// Lower bound `B` used to start the search.
    pub lower_bound: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverReport {
    pub algorithm: String,
    pub final_solution: DenseVector,
    pub final_support: SupportSet,
    pub final_value: f64,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub rng_seed: u64,
    pub flags: BTreeSet<Flag>,
    pub arht: Option<ArhtDiagnostics>,
}

impl SolverReport {
    pub(crate) fn new(algorithm: &str, n: usize, seed: u64) -> Self {
        SolverReport {
            algorithm: algorithm.to_string(),
            final_solution: DenseVector::zeros(n),
            final_support: SupportSet::new(),
            final_value: f64::NAN,
            trace: Vec::new(),
            iterations: 0,
            rng_seed: seed,
            flags: BTreeSet::new(),
            arht: None,
        }
    }

    pub(crate) fn push(&mut self, iteration: usize, support: &SupportSet, value: f64, kind: StepKind) {
        self.trace.push(TraceEntry {
            iteration,
            support: support.clone(),
            value,
            kind,
            reg: None,
        });
    }

    pub(crate) fn absorb(&mut self, flags: SolveFlags) {
        if flags.rank_deficient {
            self.flags.insert(Flag::RankDeficient);
        }
        if flags.capped {
            self.flags.insert(Flag::Capped);
        }
        if flags.not_converged {
            self.flags.insert(Flag::InnerNotConverged);
        }
    }

    pub(crate) fn finish(&mut self, x: DenseVector, support: SupportSet, value: f64) {
        self.final_solution = x;
        self.final_support = support;
        self.final_value = value;
    }

    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// `;`-joined flag names, as written to sweep records.
    pub fn flag_string(&self) -> String {
        self.flags
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}
