//! `lpbound`: bounds on the optimal value of a linear program whose
//! constraint matrix moves with a scalar parameter λ.
//!
//! Exit codes: 0 success, 1 input error, 2 no result (a bound unavailable
//! everywhere, a non-optimal solve, or a rejected generator draw).

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lpbound::bench::{self, BenchConfig, BenchProblem, RowFilter};
use lpbound::io::mps::parse_mps_model;
use lpbound::io::results::{Real, RefineDocument};
use lpbound::io::{load_problem, ResultsDocument};
use lpbound::refine::{refine, RefineConfig};
use lpbound::{simplex, toys, BoundContext, Execution, Method, ParametricLp, Side, Status};

#[derive(Debug, Parser)]
#[command(name = "lpbound", version, about, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem at one value of λ.
    Solve(SolveArgs),
    /// Compute one bounding method on N uniform subintervals.
    Bound(BoundArgs),
    /// Compute an envelope bound (robust or Lagrangian family).
    Envelope(EnvelopeArgs),
    /// Tighten a lower/upper pair by bisecting the widest gap.
    Refine(RefineArgs),
    /// Draw a random perturbation of an MPS model.
    Generate(GenerateArgs),
    /// Score methods against dense sampling on a directory of problems.
    Bench(BenchArgs),
    /// Write the bundled toy problems into a directory.
    Toys(ToysArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// MPS file.
    #[arg(long)]
    mps: PathBuf,
    /// Perturbation sidecar; defaults to `<stem>.perturb.json` next to the MPS file.
    #[arg(long)]
    perturb: Option<PathBuf>,
}

impl ProblemArgs {
    fn load(&self) -> Result<(String, ParametricLp)> {
        let perturb = self.perturb.clone().unwrap_or_else(|| sidecar(&self.mps));
        let p = load_problem(&self.mps, &perturb)
            .with_context(|| format!("loading {} with {}", self.mps.display(), perturb.display()))?;
        Ok((stem(&self.mps), p))
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn write(&self, text: &str) -> Result<()> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.out {
            Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    method: Method,
    #[arg(long, default_value = "upper")]
    side: Side,
    #[arg(long, default_value_t = 1)]
    splits: usize,
    /// Also record sampled true values.
    #[arg(long)]
    samples: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum Family {
    Robust,
    Lagrangian,
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "upper")]
    side: Side,
    /// Defaults to robust for the upper side and Lagrangian for the lower.
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, default_value_t = 1)]
    splits: usize,
    #[arg(long)]
    samples: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "lagrangian-envelope")]
    lower: Method,
    #[arg(long, default_value = "robust-envelope")]
    upper: Method,
    /// Subintervals narrower than this get a truth point instead of a bisection.
    #[arg(long, default_value_t = 1e-3)]
    eps_lambda: f64,
    /// Seconds.
    #[arg(long, default_value = "30", value_parser = seconds)]
    time_limit: Duration,
    /// Stop refining subintervals whose gap is at most this.
    #[arg(long)]
    target_gap: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Include wall-clock time in the output.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    mps: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which rows may be perturbed: any, equality-only or inequality-only.
    #[arg(long, default_value = "any", value_parser = row_filter)]
    rows: RowFilter,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of `*.mps` files, each with a `<stem>.perturb.json` sidecar.
    #[arg(long)]
    problems: PathBuf,
    /// Comma-separated methods; all when absent.
    #[arg(long)]
    methods: Option<List<Method>>,
    #[arg(long, default_value = "upper,lower")]
    sides: List<Side>,
    #[arg(long, default_value = "1,5,10")]
    splits: List<usize>,
    /// Seconds per bound.
    #[arg(long, default_value = "60", value_parser = seconds)]
    timeout: Duration,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Fill the rel_time column.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ToysArgs {
    #[arg(long)]
    dir: PathBuf,
}

/// A comma-separated list given as one flag value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<T>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|v| if v.is_empty() { Err("empty list".into()) } else { Ok(List(v)) })
    }
}

fn seconds(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Duration::try_from_secs_f64(v).map_err(|_| format!("'{s}' is not a nonnegative number of seconds"))
}

fn row_filter(s: &str) -> Result<RowFilter, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown row filter '{s}' (expected any, equality-only or inequality-only)"))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn sidecar(mps: &Path) -> PathBuf {
    mps.with_file_name(format!("{}.perturb.json", stem(mps)))
}

/// Whether the command produced a result.
#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Done,
    NoResult,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LB_LOG_LEVEL", "warn")).init();
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NoResult) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bound(a) => cmd_bound(&a.problem, a.method, a.side, a.splits, a.samples, &a.out),
        Command::Envelope(a) => {
            let family = a.family.unwrap_or(match a.side {
                Side::Upper => Family::Robust,
                Side::Lower => Family::Lagrangian,
            });
            let method = match family {
                Family::Robust => Method::RobustEnvelope,
                Family::Lagrangian => Method::LagrangianEnvelope,
            };
            cmd_bound(&a.problem, method, a.side, a.splits, a.samples, &a.out)
        }
        Command::Refine(a) => cmd_refine(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Toys(a) => cmd_toys(a),
    }
}

#[derive(Serialize)]
struct SolveDocument {
    problem: String,
    lambda: Real,
    status: Status,
    objective: Real,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    x: Vec<Real>,
}

fn cmd_solve(a: SolveArgs) -> Result<Outcome> {
    let (name, p) = a.problem.load()?;
    if !p.interval.contains(a.lambda) {
        log::warn!("λ = {} lies outside the problem's interval {}", a.lambda, p.interval);
    }
    let out = simplex::solve(&p.instantiate(a.lambda));
    log::info!("{name} at λ = {}: {:?} after {} pivots", a.lambda, out.status, out.pivots);
    let doc = SolveDocument {
        problem: name,
        lambda: Real(a.lambda),
        status: out.status,
        objective: Real(out.objective),
        x: out.x.iter().copied().map(Real).collect(),
    };
    a.out.write(&serde_json::to_string_pretty(&doc)?)?;
    Ok(if out.is_optimal() { Outcome::Done } else { Outcome::NoResult })
}

fn cmd_bound(problem: &ProblemArgs, method: Method, side: Side, n: usize, samples: bool, out: &OutArgs) -> Result<Outcome> {
    let (name, p) = problem.load()?;
    let ctx = BoundContext::new(p)?;
    let bf = ctx.bound(method, side, n, Execution::Sequential)?;
    log::info!("{name}: {method} {side} N={n}: {} segments", bf.segments.len());
    let mut doc = ResultsDocument::from_bound(&bf).with_problem(name);
    if samples {
        doc = doc.with_samples(&bench::sample_truth(ctx.problem()));
    }
    out.write(&doc.to_json())?;
    Ok(if bf.is_unavailable_everywhere() {
        Outcome::NoResult
    } else {
        Outcome::Done
    })
}

fn cmd_refine(a: RefineArgs) -> Result<Outcome> {
    let (name, p) = a.problem.load()?;
    let ctx = BoundContext::new(p)?;
    let cfg = RefineConfig {
        target_gap: a.target_gap,
        max_iterations: a.max_iterations,
        execution: Execution::Sequential,
        ..RefineConfig::new(a.lower, a.upper, a.eps_lambda, a.time_limit)
    };
    let result = refine(&ctx, &cfg)?;
    log::info!(
        "{name}: {} iterations, {} truth points, max gap {:e}",
        result.trace.len(),
        result.points.len(),
        result.max_gap()
    );
    a.out.write(&RefineDocument::new(&cfg, &result, a.timing).to_json())?;
    Ok(Outcome::Done)
}

fn cmd_generate(a: GenerateArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&a.mps).with_context(|| format!("reading {}", a.mps.display()))?;
    let model = parse_mps_model(&text).with_context(|| format!("parsing {}", a.mps.display()))?;
    match bench::generate_instance(&model, a.seed, a.rows) {
        Ok(g) => {
            a.out.write(&g.spec.to_json())?;
            Ok(Outcome::Done)
        }
        Err(r) => {
            eprintln!("seed {} rejected: {r:?}", a.seed);
            Ok(Outcome::NoResult)
        }
    }
}

fn load_dir(dir: &Path) -> Result<Vec<BenchProblem>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|f| f.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps")));
    files.sort();
    if files.is_empty() {
        bail!("no *.mps problems in {}", dir.display());
    }
    files
        .iter()
        .map(|mps| {
            let perturb = sidecar(mps);
            let problem = load_problem(mps, &perturb)
                .with_context(|| format!("loading {} with {}", mps.display(), perturb.display()))?;
            Ok(BenchProblem { name: stem(mps), problem })
        })
        .collect()
}

fn cmd_bench(a: BenchArgs) -> Result<Outcome> {
    let problems = load_dir(&a.problems)?;
    let cfg = BenchConfig {
        methods: a.methods.map_or_else(|| Method::ALL.to_vec(), |l| l.0),
        sides: a.sides.0,
        splits: a.splits.0,
        timeout: a.timeout,
        seed: a.seed,
        workers: a.workers,
        execution: if a.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    if cfg.splits.contains(&0) {
        bail!("--splits values must be positive");
    }
    log::info!("benchmarking {} problems", problems.len());
    let records = bench::run_benchmark(&problems, &cfg);
    let mut csv = Vec::new();
    bench::write_csv(&records, a.timing, &mut csv)?;
    a.out.write(std::str::from_utf8(&csv)?)?;
    Ok(Outcome::Done)
}

fn cmd_toys(a: ToysArgs) -> Result<Outcome> {
    fs::create_dir_all(&a.dir).with_context(|| format!("creating {}", a.dir.display()))?;
    for (name, _) in toys::all() {
        let (mps, perturb) = toys::fixture(name).expect("bundled toy");
        fs::write(a.dir.join(format!("{name}.mps")), mps)?;
        fs::write(a.dir.join(format!("{name}.perturb.json")), perturb)?;
    }
    Ok(Outcome::Done)
}
