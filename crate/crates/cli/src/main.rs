use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use sparsekit::analysis::{
    brute_force_restricted_constants, check_solution_recovery, check_support_recovery, compute_rgoc,
    logistic_constant_bounds, rip_tradeoff_bound, verify_ompr_progress, DEFAULT_THETA,
};
use sparsekit::instances::{correlated_planted, gaussian_planted, ompr_adversarial, DEFAULT_ADVERSARIAL_DELTA};
use sparsekit::io::{
    load_csv, preprocess, run_sweep, write_csv, write_json, Algorithm, CsvSchema, Dataset, Format, InstanceFile,
    SweepConfig, Task,
};
use sparsekit::solvers::{ompr, Init, LassoSearch};
use sparsekit::{support_of, Error, Loss, Objective, SolverConfig, SolverReport, SupportSet, DEFAULT_INNER_TOL};

#[derive(Parser)]
#[command(name = "sparsekit", version, about = "Sparse convex optimization under a sparsity constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run one solver and print its solution.
    Solve(SolveArgs),
    /// Run several solvers over a grid of sparsity levels.
    Sweep(SweepArgs),
    /// Check recovery guarantees and progress bounds.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Restricted smoothness and strong convexity at one sparsity level.
    Constants(ConstantsArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Gaussian design with a planted sparse target.
    Planted {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s_star: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Neighbouring-column correlation; 0 gives independent columns.
        #[arg(long, default_value_t = 0.0)]
        correlation: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagonal instance on which OMPR stalls.
    Adversarial {
        #[arg(long)]
        s_star: usize,
        #[arg(long)]
        kappa: usize,
        #[arg(long, default_value_t = DEFAULT_ADVERSARIAL_DELTA)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Regression,
    Binary,
}

#[derive(Args)]
struct Input {
    /// Instance file written by `gen`.
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    instance: Option<PathBuf>,
    /// Numeric CSV dataset with a header row.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    label: String,
    #[arg(long, value_enum, default_value = "regression")]
    task: TaskArg,
    /// Columns to one-hot encode.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    /// Use CSV columns as-is: no intercept, no normalization.
    #[arg(long)]
    raw: bool,
}

struct Loaded {
    dataset: Dataset,
    instance: Option<InstanceFile>,
}

impl Input {
    fn load(&self) -> sparsekit::Result<Loaded> {
        if let Some(path) = &self.instance {
            let file = InstanceFile::load(path)?;
            let dataset = file.dataset(&file.kind)?;
            return Ok(Loaded {
                dataset,
                instance: Some(file),
            });
        }
        let path = self.csv.as_ref().expect("clap enforces one input");
        let task = match self.task {
            TaskArg::Regression => Task::Regression,
            TaskArg::Binary => Task::Binary,
        };
        let mut schema = CsvSchema::new(self.label.clone(), task);
        schema.categorical = self.categorical.clone();
        let raw = load_csv(path, &schema)?;
        let dataset = if self.raw { raw } else { preprocess(&raw, false)? };
        Ok(Loaded {
            dataset,
            instance: None,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Omp,
    Leading,
    /// The initial support stored in the instance file.
    Instance,
}

#[derive(Args)]
struct SolverArgs {
    /// Selectable features; an intercept, when present, is added on top.
    #[arg(long)]
    sparsity: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Require full progress on every accepted regularized swap.
    #[arg(long)]
    strict: bool,
    /// Keep swapping for exactly `max_iterations` steps.
    #[arg(long)]
    run_exactly_t: bool,
    /// Stop a regularized run once half the support is unregularized and progress stalls.
    #[arg(long)]
    early_stop: bool,
    /// Regularization weight; defaults to an upper bound on the pairwise smoothness.
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long, value_enum, default_value = "omp")]
    init: InitArg,
}

impl SolverArgs {
    fn config(&self, loaded: &Loaded) -> sparsekit::Result<SolverConfig> {
        let pinned = pinned(&loaded.dataset);
        let mut cfg = SolverConfig::new(self.sparsity + pinned.len())
            .with_epsilon(self.eps)
            .with_seed(self.seed)
            .with_max_iterations(self.max_iterations)
            .with_pinned(pinned);
        if self.strict {
            cfg = cfg.strict();
        }
        cfg.run_exactly_t = self.run_exactly_t;
        cfg.early_stop_heuristic = self.early_stop;
        cfg.weight = self.weight;
        cfg.init = match self.init {
            InitArg::Omp => Init::Omp,
            InitArg::Leading => Init::Leading,
            InitArg::Instance => {
                let s = loaded
                    .instance
                    .as_ref()
                    .and_then(|f| f.initial_support.clone())
                    .ok_or_else(|| Error::InvalidArgument("input carries no initial support".into()))?;
                Init::Given(s)
            }
        };
        Ok(cfg)
    }
}

fn pinned(ds: &Dataset) -> SupportSet {
    ds.intercept_index.map(|i| SupportSet::from_indices([i])).unwrap_or_default()
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "ompr")]
    algo: Algorithm,
    /// `json` prints a summary; `csv` prints the nonzero coefficients.
    #[arg(long, default_value = "json")]
    format: Format,
    /// Include the per-iteration trace in JSON output.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_delimiter = ',', default_value = "omp,ompr,els,arht")]
    algo: Vec<Algorithm>,
    /// Sparsity levels, intercept excluded.
    #[arg(long, value_delimiter = ',', required = true)]
    sparsity: Vec<usize>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Largest RIP constant for which the replacement guarantee applies.
    Rip {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        s_star: usize,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
    },
    /// Solve a planted instance and check the distance and support recovery bounds.
    Recovery {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "ompr")]
        algo: Algorithm,
        /// Strong convexity constant; computed by enumeration when omitted.
        #[arg(long)]
        rho_minus: Option<f64>,
    },
    /// Check the one-step OMPR progress bound along an OMPR run.
    Progress {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    level: usize,
    /// Logistic only: lower bound on the sigmoid curvature over the region of interest.
    #[arg(long, default_value_t = 0.25)]
    curvature: f64,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    algorithm: &'a str,
    sparsity: usize,
    support: &'a SupportSet,
    value: f64,
    iterations: usize,
    seed: u64,
    flags: Vec<String>,
    solution: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [sparsekit::TraceEntry]>,
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> sparsekit::Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn least_squares(loss: &Loss) -> sparsekit::Result<&sparsekit::LeastSquares> {
    match loss {
        Loss::LeastSquares(f) => Ok(f),
        Loss::Logistic(_) => Err(Error::InvalidArgument("this check needs a regression input".into())),
    }
}

fn x_star(loaded: &Loaded) -> sparsekit::Result<DVector<f64>> {
    loaded
        .instance
        .as_ref()
        .and_then(InstanceFile::x_star)
        .ok_or_else(|| Error::InvalidArgument("this check needs an instance with a planted target".into()))
}

fn run_solver(algo: Algorithm, f: &dyn Objective, cfg: &SolverConfig) -> sparsekit::Result<SolverReport> {
    algo.run(f, cfg, &LassoSearch::default())
}

fn gen(cmd: GenCommand) -> sparsekit::Result<()> {
    match cmd {
        GenCommand::Planted {
            m,
            n,
            s_star,
            noise,
            correlation,
            seed,
            out,
        } => {
            let p = if correlation > 0.0 {
                correlated_planted(m, n, s_star, noise, correlation, seed)?
            } else {
                gaussian_planted(m, n, s_star, noise, seed)?
            };
            let mut file = InstanceFile::from_planted(&p);
            if correlation > 0.0 {
                file.metadata.insert("correlation".into(), correlation);
            }
            print_json(&file, &out)
        }
        GenCommand::Adversarial {
            s_star,
            kappa,
            delta,
            out,
        } => print_json(&InstanceFile::from_adversarial(&ompr_adversarial(s_star, kappa, delta)?), &out),
    }
}

fn solve(args: SolveArgs) -> sparsekit::Result<()> {
    let loaded = args.input.load()?;
    let cfg = args.solver.config(&loaded)?;
    let loss = loaded.dataset.loss()?;
    let f = loss.as_objective();
    let rep = run_solver(args.algo, f, &cfg)?;
    match args.format {
        Format::Json => {
            let summary = SolveSummary {
                algorithm: &rep.algorithm,
                sparsity: cfg.sparsity,
                support: &rep.final_support,
                value: f.value(&rep.final_solution),
                iterations: rep.iterations,
                seed: rep.rng_seed,
                flags: rep.flags.iter().map(ToString::to_string).collect(),
                solution: rep.final_solution.iter().copied().collect(),
                trace: args.trace.then_some(rep.trace.as_slice()),
            };
            print_json(&summary, &args.out)
        }
        Format::Csv => {
            let mut w = open_out(&args.out)?;
            writeln!(w, "index,feature,value")?;
            for i in support_of(&rep.final_solution, 0.0).iter() {
                let name = &loaded.dataset.feature_names[i];
                writeln!(w, "{i},{name},{}", sparsekit::io::format_float(rep.final_solution[i]))?;
            }
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> sparsekit::Result<()> {
    let loaded = args.input.load()?;
    let mut cfg = SweepConfig {
        master_seed: args.seed,
        ..Default::default()
    };
    cfg.solver.epsilon = args.eps;
    if args.strict {
        cfg.solver = cfg.solver.strict();
    }
    let res = run_sweep(&loaded.dataset, &args.algo, &args.sparsity, &cfg)?;
    let w = open_out(&args.out)?;
    match args.format {
        Format::Csv => write_csv(&res, w),
        Format::Json => write_json(&res, w),
    }
}

fn verify(cmd: VerifyCommand) -> sparsekit::Result<()> {
    match cmd {
        VerifyCommand::Rip { s, s_star, theta } => {
            let bound = rip_tradeoff_bound(s, s_star, theta)?;
            print_json(&json!({ "s": s, "s_star": s_star, "theta": theta, "delta_bound": bound }), &None)
        }
        VerifyCommand::Recovery {
            input,
            solver,
            algo,
            rho_minus,
        } => {
            let loaded = input.load()?;
            let target = x_star(&loaded)?;
            let cfg = solver.config(&loaded)?;
            let loss = loaded.dataset.loss()?;
            let f = least_squares(&loss)?;
            let rep = run_solver(algo, f, &cfg)?;
            let x = &rep.final_solution;
            let level = support_of(x, 0.0).union(&support_of(&target, 0.0)).len().max(1);
            let rho_minus = match rho_minus {
                Some(v) => v,
                None => brute_force_restricted_constants(f, level)?.rho_minus,
            };
            let solution = check_solution_recovery(f, x, &target, rho_minus, cfg.epsilon, None)?;
            let zeta = compute_rgoc(f, &target, level)?;
            let support = check_support_recovery(x, &target, zeta, rho_minus)?;
            print_json(
                &json!({
                    "algorithm": rep.algorithm,
                    "level": level,
                    "rho_minus": rho_minus,
                    "solution": { "verdict": solution.verdict(), "assessment": solution },
                    "support": { "verdict": support.verdict(), "assessment": support },
                }),
                &None,
            )
        }
        VerifyCommand::Progress { input, solver } => {
            let loaded = input.load()?;
            let target = x_star(&loaded)?;
            let mut cfg = solver.config(&loaded)?;
            cfg.pinned = SupportSet::new();
            let loss = loaded.dataset.loss()?;
            let f = least_squares(&loss)?;
            let s_star = support_of(&target, 0.0).len();
            let rho2 = sparsekit::analysis::brute_force_rho2_plus(f)?;
            let rho_minus = brute_force_restricted_constants(f, (cfg.sparsity + s_star).min(f.dim()))?.rho_minus;
            let rep = ompr(f, &cfg)?;
            let mut checks = Vec::new();
            for entry in &rep.trace {
                let x = f.restricted_minimize(&entry.support, DEFAULT_INNER_TOL).x;
                checks.push(verify_ompr_progress(
                    f,
                    &entry.support,
                    &x,
                    &target,
                    rho2,
                    rho_minus,
                    DEFAULT_INNER_TOL,
                    1e-9,
                )?);
            }
            let all = checks.iter().all(|c| c.holds);
            print_json(
                &json!({ "rho2_plus": rho2, "rho_minus": rho_minus, "all_hold": all, "steps": checks }),
                &None,
            )
        }
    }
}

fn constants(args: ConstantsArgs) -> sparsekit::Result<()> {
    let loaded = args.input.load()?;
    let c = match loaded.dataset.loss()? {
        Loss::LeastSquares(f) => brute_force_restricted_constants(&f, args.level)?,
        Loss::Logistic(f) => logistic_constant_bounds(&f, args.level, args.curvature)?,
    };
    print_json(&c, &None)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(cmd) => gen(cmd),
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Verify(cmd) => verify(cmd),
        Command::Constants(args) => constants(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
