//! Adaptively regularized hard thresholding.
//!
//! The core routine runs OMPR-style swaps on `g_R(x) = f(x) + (w/2)‖x_R‖²`. A swap
//! is committed only if it lowers `g_R` by at least `(c/s)(g_R(x) − opt)` (Type 1);
//! otherwise one index of `R` is sampled with probability proportional to `x_i²` and
//! unregularized (Type 2). A robust wrapper repeats the core with fresh randomness
//! and a driver binary-searches the target value `opt`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::objective::Objective;
use crate::objectives::{estimate_rho2_plus, Regularized};
use crate::report::{ArhtDiagnostics, Flag, RegStep, SolverReport, StepKind, TraceEntry};
use crate::support::{argmax_by, argmin_by, DenseVector, SupportSet};

use super::{initial_support, removable, SolverConfig};

/// Binary-search steps allowed before the driver gives up on `r − l ≤ ε`.
const MAX_SEARCH_STEPS: usize = 500;

/// `⌈2s·ln((f(0) − B)/ε)⌉`, at least one.
pub fn core_iteration_budget(s: usize, gap: f64, eps: f64) -> usize {
    let t = 2.0 * s as f64 * (gap / eps).ln();
    if t.is_finite() && t > 1.0 {
        t.ceil() as usize
    } else {
        1
    }
}

/// `⌈5·ln(6n·ln((f(0) − B)/ε))⌉`, at least one.
pub fn repetition_count(n: usize, gap: f64, eps: f64) -> usize {
    let inner = 6.0 * n as f64 * (gap / eps).ln();
    let z = 5.0 * inner.ln();
    if z.is_finite() && z > 1.0 {
        z.ceil() as usize
    } else {
        1
    }
}

/// Draws `i ∈ R` with probability `x_i² / ‖x_R‖₂²`; `None` when `‖x_R‖₂ = 0`.
pub fn sample_unregularize_index<R: Rng + ?Sized>(x: &DenseVector, reg: &SupportSet, rng: &mut R) -> Option<usize> {
    let candidates: Vec<usize> = reg.iter().filter(|&i| x[i] != 0.0).collect();
    if candidates.is_empty() {
        return None;
    }
    let weights: Vec<f64> = candidates.iter().map(|&i| x[i] * x[i]).collect();
    let dist = WeightedIndex::new(&weights).ok()?;
    Some(candidates[dist.sample(rng)])
}

/// Quantities shared by every core run of one driver call.
struct Context<'a, F: ?Sized> {
    f: &'a F,
    cfg: &'a SolverConfig,
    weight: f64,
    init: SupportSet,
    f_zero: f64,
    lower: f64,
}

impl<'a, F: Objective + ?Sized> Context<'a, F> {
    fn new(f: &'a F, cfg: &'a SolverConfig, lower: f64) -> Result<Self> {
        cfg.validate(f.dim())?;
        let weight = estimate_rho2_plus(f, cfg.weight)?;
        let init = initial_support(f, cfg)?;
        let f_zero = f.value(&DenseVector::zeros(f.dim()));
        Ok(Context {
            f,
            cfg,
            weight,
            init,
            f_zero,
            lower,
        })
    }

    fn gap(&self) -> f64 {
        self.f_zero - self.lower
    }
}

struct CoreOutcome {
    report: SolverReport,
    steps: Vec<RegStep>,
    success: bool,
}

fn run_core<F: Objective + ?Sized>(ctx: &Context<'_, F>, opt: f64, eps: f64, rng: &mut ChaCha8Rng) -> CoreOutcome {
    let f = ctx.f;
    let cfg = ctx.cfg;
    let n = f.dim();
    let s = cfg.sparsity.max(1);
    let mut report = SolverReport::new("arht_core", n, cfg.rng_seed);
    let mut steps = Vec::new();
    let mut g = Regularized::new(f, ctx.weight).expect("weight validated");
    let mut support = ctx.init.clone();
    let mut sol = g.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(sol.flags);
    report.push(0, &support, f.value(&sol.x), StepKind::Init);

    let budget = core_iteration_budget(s, ctx.gap(), eps);
    if budget > cfg.max_iterations {
        report.flags.insert(Flag::IterationCap);
    }
    let budget = budget.min(cfg.max_iterations);

    for t in 0..budget {
        let fmin = f.restricted_minimize(&support, cfg.inner_tol);
        report.absorb(fmin.flags);
        if fmin.value <= opt {
            report.flags.insert(Flag::EarlyExit);
            report.iterations = t;
            let value = fmin.value;
            report.finish(fmin.x, support, value);
            return CoreOutcome {
                report,
                steps,
                success: true,
            };
        }

        let g_before = g.value(&sol.x);
        let grad = g.gradient(&sol.x);
        let insert = argmax_by((0..n).filter(|&i| !support.contains(i)), |i| grad[i].abs());
        let remove = argmin_by(removable(&support, &cfg.pinned), |j| sol.x[j].abs());
        let (Some(insert), Some(remove)) = (insert, remove) else {
            break;
        };
        let reg_overlap = support.intersection(g.reg_set()).len();
        let reg_size = g.reg_set().len();
        let required_progress = cfg.progress_fraction / s as f64 * (g_before - opt);
        let candidate = support.swapped(insert, remove);
        let proposal = g.restricted_minimize(&candidate, cfg.inner_tol);
        report.absorb(proposal.flags);

        let step = if g_before - proposal.value >= required_progress {
            support = candidate;
            sol = proposal;
            RegStep {
                kind: StepKind::Type1,
                g_before,
                g_after: sol.value,
                g_proposal: None,
                opt,
                required_progress,
                reg_overlap,
                reg_size,
            }
        } else {
            let unregularized = support.len() - reg_overlap;
            if cfg.early_stop_heuristic && 2 * unregularized >= support.len() {
                report.flags.insert(Flag::EarlyStopHeuristic);
                report.iterations = t;
                break;
            }
            let Some(i) = sample_unregularize_index(&sol.x, g.reg_set(), rng) else {
                report.flags.insert(Flag::Stalled);
                report.iterations = t;
                break;
            };
            g.unregularize(i).expect("sampled from R");
            sol = g.restricted_minimize(&support, cfg.inner_tol);
            report.absorb(sol.flags);
            RegStep {
                kind: StepKind::Type2,
                g_before,
                g_after: sol.value,
                g_proposal: Some(proposal.value),
                opt,
                required_progress,
                reg_overlap,
                reg_size,
            }
        };
        report.trace.push(TraceEntry {
            iteration: t + 1,
            support: support.clone(),
            value: f.value(&sol.x),
            kind: step.kind,
            reg: Some(step.clone()),
        });
        steps.push(step);
        report.iterations = t + 1;
    }

    // hand back the f-minimizer on the final support rather than the g-minimizer
    let refit = f.restricted_minimize(&support, cfg.inner_tol);
    report.absorb(refit.flags);
    let success = refit.value <= opt + eps;
    let value = refit.value;
    report.finish(refit.x, support, value);
    CoreOutcome { report, steps, success }
}

struct RobustOutcome {
    best: Option<SolverReport>,
    x: DenseVector,
    value: f64,
}

fn run_robust<F: Objective + ?Sized>(
    ctx: &Context<'_, F>,
    opt: f64,
    eps: f64,
    rng: &mut ChaCha8Rng,
    diag: &mut ArhtDiagnostics,
) -> RobustOutcome {
    let n = ctx.f.dim();
    let reps = ctx
        .cfg
        .repetitions
        .unwrap_or_else(|| repetition_count(n, ctx.gap(), eps))
        .max(1);
    diag.repetitions = reps;
    let mut out = RobustOutcome {
        best: None,
        x: DenseVector::zeros(n),
        value: ctx.f_zero,
    };
    for _ in 0..reps {
        let mut core_rng = ChaCha8Rng::seed_from_u64(rng.random());
        let core = run_core(ctx, opt, eps, &mut core_rng);
        diag.core_runs += 1;
        diag.successful_cores += usize::from(core.success);
        diag.steps.extend(core.steps);
        if core.report.final_value < out.value {
            out.value = core.report.final_value;
            out.x = core.report.final_solution.clone();
            out.best = Some(core.report);
        }
    }
    out
}

fn assemble<F: Objective + ?Sized>(
    ctx: &Context<'_, F>,
    name: &str,
    best: Option<SolverReport>,
    x: DenseVector,
    value: f64,
    diag: ArhtDiagnostics,
) -> SolverReport {
    let n = ctx.f.dim();
    let best_found = best.is_some();
    let mut report = best.unwrap_or_else(|| {
        let mut r = SolverReport::new(name, n, ctx.cfg.rng_seed);
        r.push(0, &SupportSet::new(), ctx.f_zero, StepKind::Init);
        r
    });
    report.algorithm = name.to_string();
    report.rng_seed = ctx.cfg.rng_seed;
    // x is either the best core's output or the zero vector
    let support = if best_found { report.final_support.clone() } else { SupportSet::new() };
    report.finish(x, support, value);
    report.arht = Some(diag);
    report
}

/// One ARHT core run at target value `opt`.
///
/// Returns early with the `f`-minimizer on the current support as soon as its value
/// is at most `opt`; otherwise runs `⌈2s·ln((f(0) − B)/ε)⌉` iterations (capped by
/// `max_iterations`) and returns the `f`-minimizer on the last support.
pub fn arht_core<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig, opt: f64) -> Result<SolverReport> {
    let lower = f.global_lower_bound();
    let ctx = Context::new(f, cfg, lower)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let core = run_core(&ctx, opt, cfg.epsilon, &mut rng);
    let mut report = core.report;
    report.algorithm = "arht_core".into();
    report.arht = Some(ArhtDiagnostics {
        repetitions: 1,
        core_runs: 1,
        successful_cores: usize::from(core.success),
        steps: core.steps,
        lower_bound: lower,
        weight: ctx.weight,
        intervals: Vec::new(),
    });
    Ok(report)
}

/// Repeats the core routine and keeps the lowest-`f` result. `lower` is the bound `B`.
pub fn arht_robust<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig, opt: f64, lower: f64) -> Result<SolverReport> {
    let ctx = Context::new(f, cfg, lower)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut diag = ArhtDiagnostics {
        lower_bound: lower,
        weight: ctx.weight,
        ..Default::default()
    };
    let out = run_robust(&ctx, opt, cfg.epsilon, &mut rng, &mut diag);
    Ok(assemble(&ctx, "arht_robust", out.best, out.x, out.value, diag))
}

/// Full ARHT: binary search on the target value between `B = min f` and `f(0)`,
/// calling the robust routine with `ε/3` at each midpoint.
pub fn arht<F: Objective + ?Sized>(f: &F, cfg: &SolverConfig) -> Result<SolverReport> {
    let lower = f.global_lower_bound();
    let ctx = Context::new(f, cfg, lower)?;
    let eps = cfg.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut diag = ArhtDiagnostics {
        lower_bound: lower,
        weight: ctx.weight,
        ..Default::default()
    };
    let n = f.dim();
    let mut l = lower;
    let mut r = ctx.f_zero;
    let mut b = DenseVector::zeros(n);
    let mut best: Option<SolverReport> = None;
    diag.intervals.push((l, r));
    let mut steps = 0;
    while r - l > eps {
        if steps == MAX_SEARCH_STEPS {
            log::warn!("arht binary search stopped after {steps} steps with r - l = {}", r - l);
            break;
        }
        let m = 0.5 * (l + r);
        let out = run_robust(&ctx, m, eps / 3.0, &mut rng, &mut diag);
        if out.value > m + eps / 3.0 {
            l = m;
        } else {
            b = out.x;
            r = out.value;
            best = out.best;
        }
        diag.intervals.push((l, r));
        steps += 1;
    }
    let hit_cap = steps == MAX_SEARCH_STEPS;
    let mut report = assemble(&ctx, "arht", best, b, r, diag);
    report.iterations = steps;
    if hit_cap {
        report.flags.insert(Flag::IterationCap);
    }
    Ok(report)
}
