use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objective::Objective;
use crate::report::{Flag, SolverReport};
use crate::solvers::{
    arht, default_step, exhaustive_local_search, iht, lasso_path, omp, ompr, Init, LassoSearch,
    SolverConfig,
};
use crate::support::SupportSet;

use super::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Iht,
    Omp,
    Ompr,
    Els,
    Arht,
    Lasso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Iht,
        Algorithm::Omp,
        Algorithm::Ompr,
        Algorithm::Els,
        Algorithm::Arht,
        Algorithm::Lasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iht => "iht",
            Algorithm::Omp => "omp",
            Algorithm::Ompr => "ompr",
            Algorithm::Els => "els",
            Algorithm::Arht => "arht",
            Algorithm::Lasso => "lasso",
        }
    }

    /// Runs the algorithm with `cfg` as given (no warm-start substitution).
    pub fn run<F: Objective + ?Sized>(self, f: &F, cfg: &SolverConfig, lasso: &LassoSearch) -> Result<SolverReport> {
        match self {
            Algorithm::Iht => iht(f, cfg, default_step(f)?),
            Algorithm::Omp => omp(f, cfg),
            Algorithm::Ompr => ompr(f, cfg),
            Algorithm::Els => exhaustive_local_search(f, cfg),
            Algorithm::Arht => arht(f, cfg),
            Algorithm::Lasso => lasso_path(f, cfg, lasso),
        }
    }

    fn warm_started(self) -> bool {
        matches!(self, Algorithm::Ompr | Algorithm::Els | Algorithm::Arht)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Template for every cell; `sparsity`, `rng_seed`, `init` and `pinned` are overwritten.
    pub solver: SolverConfig,
    pub master_seed: u64,
    pub lasso: LassoSearch,
}

impl Default for SweepConfig {
    /// Benchmark solver settings, master seed 0.
    fn default() -> Self {
        SweepConfig {
            solver: SolverConfig::new(1).benchmark(),
            master_seed: 0,
            lasso: LassoSearch::default(),
        }
    }
}

/// One cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub dataset: String,
    pub algorithm: String,
    /// Nonzeros allowed, intercept included.
    pub sparsity: usize,
    /// `NaN` for failed cells (written as `null` in JSON).
    #[serde(with = "nan_as_null")]
    pub loss: f64,
    pub wall_time_ms: u64,
    pub seed: u64,
    /// `;`-joined flag names.
    pub flags: String,
}

impl SweepRecord {
    /// Equality ignoring wall time, with `NaN` losses equal to each other.
    pub fn same_outcome(&self, other: &SweepRecord) -> bool {
        self.dataset == other.dataset
            && self.algorithm == other.algorithm
            && self.sparsity == other.sparsity
            && self.loss.to_bits() == other.loss.to_bits()
            && self.seed == other.seed
            && self.flags == other.flags
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    /// Records of one algorithm, in increasing sparsity.
    pub fn curve(&self, algorithm: Algorithm) -> Vec<&SweepRecord> {
        self.records.iter().filter(|r| r.algorithm == algorithm.name()).collect()
    }
}

/// Seed for cell `index`, independent of scheduling order.
fn cell_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Runs every algorithm at every grid level.
///
/// Grid values count selectable features; when the dataset has an intercept it is
/// pinned into every support and the recorded sparsity is `k + 1`. OMPR, exhaustive
/// local search and ARHT start from the OMP support of the same sparsity. A failing
/// cell is recorded with `NaN` loss and the `failed` flag.
pub fn run_sweep(ds: &Dataset, algorithms: &[Algorithm], grid: &[usize], cfg: &SweepConfig) -> Result<SweepResult> {
    let loss = ds.loss()?;
    let f = loss.as_objective();
    let n = f.dim();
    let pinned = ds
        .intercept_index
        .map(|i| SupportSet::from_indices([i]))
        .unwrap_or_default();
    for &k in grid {
        if k + pinned.len() > n {
            return Err(invalid(format!("grid value {k} leaves no room in dimension {n}")));
        }
    }
    let cells: Vec<(usize, Algorithm, usize)> = grid
        .iter()
        .flat_map(|&k| algorithms.iter().map(move |&a| (k, a)))
        .enumerate()
        .map(|(i, (k, a))| (i, a, k))
        .collect();

    // one OMP warm start per sparsity level
    let warm: Vec<(usize, Option<SupportSet>)> = grid
        .par_iter()
        .map(|&k| {
            let s = k + pinned.len();
            let mut c = cfg.solver.clone();
            c.sparsity = s;
            c.pinned = pinned.clone();
            c.init = Init::Omp;
            (s, omp(f, &c).ok().map(|r| r.final_support))
        })
        .collect();

    let mut records: Vec<SweepRecord> = cells
        .par_iter()
        .map(|&(index, alg, k)| {
            let s = k + pinned.len();
            let seed = cell_seed(cfg.master_seed, index as u64);
            let mut c = cfg.solver.clone();
            c.sparsity = s;
            c.rng_seed = seed;
            c.pinned = pinned.clone();
            c.init = match warm.iter().find(|(ws, _)| *ws == s) {
                Some((_, Some(sup))) if alg.warm_started() => Init::Given(sup.clone()),
                _ => Init::Omp,
            };
            let start = Instant::now();
            let outcome = alg.run(f, &c, &cfg.lasso);
            let wall_time_ms = start.elapsed().as_millis() as u64;
            let (loss, flags) = match outcome {
                Ok(rep) => (f.value(&rep.final_solution), rep.flag_string()),
                Err(e) => {
                    log::warn!("{} {} at sparsity {s} failed: {e}", ds.name, alg);
                    (f64::NAN, Flag::Failed.to_string())
                }
            };
            SweepRecord {
                dataset: ds.name.clone(),
                algorithm: alg.name().to_string(),
                sparsity: s,
                loss,
                wall_time_ms,
                seed,
                flags,
            }
        })
        .collect();
    records.sort_by(|a, b| (&a.algorithm, a.sparsity).cmp(&(&b.algorithm, b.sparsity)));
    Ok(SweepResult { records })
}
