//! `setint` command-line front end.
//!
//! Exit codes: 0 success or converged, 1 a checked bound failed, 2 diverged,
//! 3 inconclusive, 64 bad input, 70 resource or solver limit, 74 I/O.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use setint::balance::{self, SelectionMode, SelectionProblem};
use setint::counterexamples::{self, L1CounterexampleConfig, GENERAL_LOWER_BOUND};
use setint::integrate::{
    self, ConvergenceReport, IntegrateOptions, Verdict, DEFAULT_CARDINALITY_CAP,
};
use setint::partition::TagRule;
use setint::{Norm, PointSet, PrunedSet, SpaceDescriptor, Vector};

use config::{
    build_schedule, load_config, parse_partition, parse_schedule, read_json, schedule_sizes,
    TagName,
};

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(setint::Error),
    Io(String),
}

impl From<setint::Error> for Failure {
    fn from(e: setint::Error) -> Self {
        Failure::Compute(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Io(_) => 74,
            Failure::Compute(e) => match e {
                setint::Error::ResourceLimit(_) | setint::Error::SolverFailure { .. } => 70,
                _ => 64,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Compute(e) => e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "setint",
    version,
    about = "Riemann integration of set-valued functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a multifunction along a refinement schedule.
    Integrate(IntegrateArgs),
    /// Compare a limit set with its midpoint set ½A + ½A.
    Convexity(ConvexityArgs),
    /// Compare P·S(F, T) with S(P∘F, T), or run the finite-rank split.
    Pushforward(PushforwardArgs),
    /// Minimise ‖Σ ±xᵢ‖ over signs.
    Balance(BalanceArgs),
    /// Lower-bound the infratype constant of a space.
    Infratype(InfratypeArgs),
    /// Choose aᵢ ∈ Aᵢ tracking targets bᵢ ∈ conv Aᵢ.
    Select(SelectArgs),
    /// The two explicit constructions.
    #[command(subcommand)]
    Counterexample(CounterexampleCommand),
}

#[derive(Args, Clone, Default)]
struct Tolerances {
    /// Convergence tolerance [default: 1e-6].
    #[arg(long)]
    tol: Option<f64>,
    /// Pruning radius after each Minkowski addition [default: 1e-4].
    #[arg(long)]
    prune_delta: Option<f64>,
    /// Hull distance solver tolerance [default: 1e-8].
    #[arg(long)]
    hull_tol: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct Outputs {
    /// Write the JSON report here (`-` for standard output).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the CSV rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration (schema version "v1").
    #[arg(long)]
    config: PathBuf,
    /// Interval counts: `2,4,8`, `uniform:2^1..8` or `uniform:2^1..8-1`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, value_enum)]
    tags: Option<TagName>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tolerances: Tolerances,
    /// Record wall time per row (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Candidate limit (PointSet JSON); overrides the config.
    #[arg(long)]
    candidate: Option<PathBuf>,
    /// Ignore any candidate and run the consecutive-sum test.
    #[arg(long)]
    cauchy: bool,
}

#[derive(Args)]
struct ConvexityArgs {
    /// Limit set as PointSet JSON.
    #[arg(long, conflicts_with = "config")]
    set: Option<PathBuf>,
    /// Experiment configuration; the limit is the sum on the finest partition.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, value_enum)]
    tags: Option<TagName>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tolerances: Tolerances,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct PushforwardArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Linear map JSON `{matrix, target}`; overrides the config.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Run the finite-rank split on the finest partition instead.
    #[arg(long)]
    split: bool,
    /// Integral generators for the split (PointSet JSON); overrides the config.
    #[arg(long)]
    integral: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    probes: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BalanceMode {
    Exact,
    Greedy,
}

#[derive(Args)]
struct BalanceArgs {
    /// JSON `{space, vectors}`.
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: BalanceMode,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct InfratypeArgs {
    #[arg(long)]
    norm: Norm,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long = "nmax", default_value_t = 12)]
    n_max: usize,
    #[arg(long)]
    seed: u64,
    /// Constant to test the estimate against.
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectMode {
    Greedy,
    Exhaustive,
}

#[derive(Args)]
struct SelectArgs {
    /// JSON `{space, sets, targets}`.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    mode: SelectMode,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Subcommand)]
enum CounterexampleCommand {
    /// ‖S(f, T)‖ for f(t) = e_t in ℓ₂([0, 1]).
    Hilbert {
        /// `uniform:N[:left|right|mid]`, `random:N:SEED` or a partition JSON path.
        #[arg(long)]
        partition: String,
        /// Merge coefficients of coinciding tags instead of assuming them distinct.
        #[arg(long)]
        merge_tags: bool,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// The ℓ₁ basis multifunction: F diverges, conv F integrates.
    L1 {
        #[arg(long)]
        n: u32,
        #[arg(long = "N")]
        big_n: usize,
        /// Confirm the closed form by enumeration.
        #[arg(long)]
        bruteforce: bool,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        outputs: Outputs,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => return report_failure(f),
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> i32 {
    eprintln!("setint: {}", f.message());
    f.code()
}

/// Worker pool capped by `SETINT_THREADS` when set.
fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SETINT_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "SETINT_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::Io(format!("cannot start worker pool: {e}")))
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Integrate(a) => cmd_integrate(a),
        Command::Convexity(a) => cmd_convexity(a),
        Command::Pushforward(a) => cmd_pushforward(a),
        Command::Balance(a) => cmd_balance(a),
        Command::Infratype(a) => cmd_infratype(a),
        Command::Select(a) => cmd_select(a),
        Command::Counterexample(c) => cmd_counterexample(c),
    }
}

fn check_positive(name: &str, v: f64, allow_zero: bool) -> Result<f64, Failure> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(v)
    } else {
        Err(Failure::Usage(format!(
            "--{name} must be a finite {} number, got {v}",
            if allow_zero {
                "nonnegative"
            } else {
                "positive"
            }
        )))
    }
}

fn options(
    t: &Tolerances,
    cfg: Option<&config::ExperimentConfig>,
    timing: bool,
) -> Result<IntegrateOptions, Failure> {
    let d = IntegrateOptions::default();
    let pick = |flag: Option<f64>, conf: Option<f64>, def: f64| flag.or(conf).unwrap_or(def);
    Ok(IntegrateOptions {
        tol: check_positive("tol", pick(t.tol, cfg.and_then(|c| c.tol), d.tol), false)?,
        prune_delta: check_positive(
            "prune-delta",
            pick(
                t.prune_delta,
                cfg.and_then(|c| c.prune_delta),
                d.prune_delta,
            ),
            true,
        )?,
        hull_tol: check_positive(
            "hull-tol",
            pick(t.hull_tol, cfg.and_then(|c| c.hull_tol), d.hull_tol),
            false,
        )?,
        cardinality_cap: cfg
            .and_then(|c| c.cardinality_cap)
            .unwrap_or(DEFAULT_CARDINALITY_CAP),
        timing,
    })
}

struct Prepared {
    cfg: config::ExperimentConfig,
    schedule: Vec<setint::TaggedPartition>,
    opts: IntegrateOptions,
    outputs: Outputs,
}

fn prepare(run: &RunArgs) -> Result<Prepared, Failure> {
    let cfg = load_config(&run.config)?;
    let sizes = match (&run.schedule, &cfg.schedule) {
        (Some(s), _) => parse_schedule(s)?,
        (None, Some(s)) => schedule_sizes(s)?,
        (None, None) => return Err(Failure::Usage("no schedule given (flag or config)".into())),
    };
    let seed = run.seed.or(cfg.seed);
    let tags = run.tags.or(cfg.tags).unwrap_or(TagName::Mid);
    let schedule = build_schedule(&sizes, tags, seed)?;
    cfg.multifunction
        .check_declared_bounds(64, seed.unwrap_or(0))?;
    let opts = options(&run.tolerances, Some(&cfg), run.timing)?;
    let outputs = Outputs {
        json: run
            .outputs
            .json
            .clone()
            .or_else(|| cfg.outputs.json.clone()),
        csv: run.outputs.csv.clone().or_else(|| cfg.outputs.csv.clone()),
    };
    Ok(Prepared {
        cfg,
        schedule,
        opts,
        outputs,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes JSON to the requested path; `-` replaces the summary on stdout.
fn emit<T: Serialize>(outputs: &Outputs, value: &T, summary: &str) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))? + "\n";
    let mut stdout = std::io::stdout().lock();
    let to_stdout = |s: &str, out: &mut std::io::StdoutLock| {
        out.write_all(s.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write to stdout: {e}")))
    };
    match outputs.json.as_deref() {
        Some(p) if p == Path::new("-") => return to_stdout(&text, &mut stdout),
        Some(p) => write_file(p, &text)?,
        None => {}
    }
    to_stdout(summary, &mut stdout)
}

/// CSV columns: mesh, distance, prune_error, solver_error, cardinality, ms.
pub fn report_csv(report: &ConvergenceReport) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record([
        "mesh",
        "distance",
        "prune_error",
        "solver_error",
        "cardinality",
        "ms",
    ])
    .map_err(err)?;
    for r in &report.rows {
        w.write_record([
            r.mesh.to_string(),
            r.distance.map(|d| d.to_string()).unwrap_or_default(),
            r.prune_error.to_string(),
            r.solver_error.to_string(),
            r.cardinality.to_string(),
            r.ms.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn report_summary(title: &str, report: &ConvergenceReport) -> String {
    let mut s = format!(
        "{title}\n{:>12}  {:>14}  {:>12}  {:>12}  {:>12}\n",
        "mesh", "distance", "prune_error", "solver_error", "cardinality"
    );
    for r in &report.rows {
        let d = r.distance.map_or("-".to_string(), |d| format!("{d:.6e}"));
        s += &format!(
            "{:>12.6e}  {:>14}  {:>12.3e}  {:>12.3e}  {:>12}\n",
            r.mesh, d, r.prune_error, r.solver_error, r.cardinality
        );
    }
    s += &match &report.verdict {
        Verdict::Converged { rate, .. } => match rate {
            Some(r) => format!("verdict: converged (log-log rate {r:.3})\n"),
            None => "verdict: converged\n".to_string(),
        },
        Verdict::Diverged { lower_bound, .. } => {
            format!("verdict: diverged (certified lower bound {lower_bound:.6})\n")
        }
        Verdict::Inconclusive => "verdict: inconclusive\n".to_string(),
    };
    s
}

fn emit_report(title: &str, outputs: &Outputs, report: &ConvergenceReport) -> Result<i32, Failure> {
    if let Some(p) = &outputs.csv {
        write_file(p, &report_csv(report)?)?;
    }
    emit(outputs, report, &report_summary(title, report))?;
    Ok(report.exit_code())
}

fn cmd_integrate(a: IntegrateArgs) -> Result<i32, Failure> {
    let p = prepare(&a.run)?;
    let candidate = match (&a.candidate, a.cauchy) {
        (_, true) => None,
        (Some(path), false) => Some(read_json::<PointSet>(path)?),
        (None, false) => p.cfg.candidate.clone(),
    };
    let report = integrate::integrate(
        &p.cfg.multifunction,
        &p.schedule,
        candidate.as_ref(),
        &p.opts,
    )?;
    emit_report("integrate", &p.outputs, &report)
}

fn satisfied_code(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

fn cmd_convexity(a: ConvexityArgs) -> Result<i32, Failure> {
    let (limit, opts) = match (&a.set, &a.config) {
        (Some(path), None) => (
            PrunedSet::exact(read_json::<PointSet>(path)?),
            options(&a.tolerances, None, false)?,
        ),
        (None, Some(path)) => {
            let run = RunArgs {
                config: path.clone(),
                schedule: a.schedule.clone(),
                tags: a.tags,
                seed: a.seed,
                tolerances: a.tolerances.clone(),
                timing: false,
                outputs: a.outputs.clone(),
            };
            let p = prepare(&run)?;
            let last = p.schedule.last().expect("schedules are nonempty");
            let f = p.cfg.multifunction.finite_part();
            (
                setint::integrate::riemann_sum_capped(
                    &f,
                    last,
                    p.opts.prune_delta,
                    p.opts.cardinality_cap,
                )?,
                p.opts,
            )
        }
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --set or --config".into(),
            ))
        }
    };
    let c = integrate::convexity_check(&limit, opts.hull_tol)?;
    let satisfied = c.hull <= 2.0 * opts.hull_tol;
    let out = json!({
        "value": c.finite,
        "hull": c.hull,
        "errBound": limit.err_bound,
        "cardinality": limit.base.len(),
        "bound": 2.0 * opts.hull_tol,
        "satisfied": satisfied,
    });
    let summary = format!(
        "convexity\nfinite-set distance to ½A+½A: {:.6e}\nhull distance: {:.3e} (allowed {:.1e})\n",
        c.finite,
        c.hull,
        2.0 * opts.hull_tol
    );
    emit(&a.outputs, &out, &summary)?;
    Ok(satisfied_code(satisfied))
}

fn cmd_pushforward(a: PushforwardArgs) -> Result<i32, Failure> {
    let p = prepare(&a.run)?;
    let map = match &a.matrix {
        Some(path) => read_json::<config::LinearMap>(path)?,
        None => p
            .cfg
            .pushforward
            .clone()
            .ok_or_else(|| Failure::Usage("no linear map given (--matrix or config)".into()))?,
    };
    let f = &p.cfg.multifunction;
    if a.split {
        let integral = match &a.integral {
            Some(path) => read_json::<PointSet>(path)?,
            None => p
                .cfg
                .integral
                .clone()
                .ok_or_else(|| Failure::Usage("the split needs integral generators".into()))?,
        };
        let t = p.schedule.last().expect("schedules are nonempty");
        let seed = a
            .run
            .seed
            .or(p.cfg.seed)
            .ok_or_else(|| Failure::Usage("the split probes need a seed".into()))?;
        let r = integrate::finite_rank_split(
            f,
            &integral,
            &map.matrix,
            t,
            p.opts.hull_tol,
            a.probes,
            seed,
        )?;
        let summary = format!(
            "finite-rank split at mesh {:.4e}\nhull {:.3e}  projected {:.3e}  complement {:.3e}  tail {:.3e}\ndistance {:.6e} <= 4·eps = {:.6e}: {}\n",
            t.mesh(),
            r.hull_error,
            r.projected_error,
            r.complement_error,
            r.tail,
            r.distance,
            r.bound,
            r.satisfied
        );
        emit(&p.outputs, &r, &summary)?;
        return Ok(satisfied_code(r.satisfied));
    }
    let report = integrate::pushforward_check(f, &map.matrix, map.target, &p.schedule, &p.opts)?;
    emit_report("pushforward", &p.outputs, &report)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorsFile {
    space: SpaceDescriptor,
    vectors: Vec<Vector>,
}

fn cmd_balance(a: BalanceArgs) -> Result<i32, Failure> {
    let file: VectorsFile = read_json(&a.vectors)?;
    let b = match a.mode {
        BalanceMode::Exact => balance::sign_balance_exact(&file.vectors, &file.space)?,
        BalanceMode::Greedy => balance::sign_balance_greedy(&file.vectors, &file.space)?,
    };
    let bound = file.space.infratype().map(|it| {
        it.c()
            * file
                .vectors
                .iter()
                .map(|x| file.space.norm_of(x.coords()).powf(it.p()))
                .sum::<f64>()
                .powf(1.0 / it.p())
    });
    let satisfied = bound.map(|bd| b.value <= bd * (1.0 + 1e-12));
    let out = json!({ "value": b.value, "signs": b.signs, "bound": bound, "satisfied": satisfied });
    let mut summary = format!("balance\nmin ‖Σ ±xᵢ‖ = {:.12}\n", b.value);
    if let Some(bd) = bound {
        summary += &format!("declared infratype bound {bd:.12}\n");
    }
    emit(&a.outputs, &out, &summary)?;
    Ok(satisfied_code(satisfied != Some(false)))
}

fn cmd_infratype(a: InfratypeArgs) -> Result<i32, Failure> {
    let space = SpaceDescriptor::new(a.dim, a.norm)?;
    let est = balance::estimate_infratype_constant(&space, a.p, a.trials, a.n_max, a.seed)?;
    let satisfied = a.c.map(|c| est <= c + 1e-12);
    let out = json!({
        "norm": a.norm,
        "dim": a.dim,
        "p": a.p,
        "trials": a.trials,
        "nMax": a.n_max,
        "seed": a.seed,
        "value": est,
        "bound": a.c,
        "satisfied": satisfied,
    });
    let summary = format!(
        "infratype {} dim {} p {}\nestimated constant (lower bound): {:.12}\n",
        a.norm.name(),
        a.dim,
        a.p,
        est
    );
    emit(&a.outputs, &out, &summary)?;
    Ok(satisfied_code(satisfied != Some(false)))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    space: SpaceDescriptor,
    sets: Vec<Vec<Vec<f64>>>,
    targets: Vec<Vector>,
}

fn cmd_select(a: SelectArgs) -> Result<i32, Failure> {
    let file: ProblemFile = read_json(&a.problem)?;
    let sets = file
        .sets
        .iter()
        .map(|rows| PointSet::from_rows(file.space, rows))
        .collect::<setint::Result<Vec<_>>>()?;
    let prob = SelectionProblem::new(file.space, sets, file.targets)?;
    let mode = match a.mode {
        SelectMode::Greedy => SelectionMode::Greedy,
        SelectMode::Exhaustive => SelectionMode::Exhaustive,
    };
    let sel = balance::select_points(&prob, mode)?;
    let bound = prob.selection_bound().ok();
    let satisfied = bound.map(|b| sel.deviation <= b);
    let out = json!({
        "value": sel.deviation,
        "points": sel.points,
        "choices": sel.choices,
        "diameters": prob.diameters(),
        "bound": bound,
        "satisfied": satisfied,
    });
    let summary = format!("select\n‖Σ(aᵢ - bᵢ)‖ = {:.12}\n", sel.deviation);
    emit(&a.outputs, &out, &summary)?;
    Ok(satisfied_code(satisfied != Some(false)))
}

fn cmd_counterexample(c: CounterexampleCommand) -> Result<i32, Failure> {
    match c {
        CounterexampleCommand::Hilbert {
            partition,
            merge_tags,
            outputs,
        } => {
            let t = parse_partition(&partition)?;
            let value = counterexamples::hilbert_example_sum_norm(&t, !merge_tags);
            let bound = t.mesh().sqrt();
            let satisfied = value <= bound * (1.0 + 1e-12);
            let out =
                json!({ "value": value, "mesh": t.mesh(), "bound": bound, "satisfied": satisfied });
            let summary =
                format!("hilbert example\n‖S(f, T)‖ = {value:.12}  (√mesh = {bound:.12})\n");
            emit(&outputs, &out, &summary)?;
            Ok(satisfied_code(satisfied))
        }
        CounterexampleCommand::L1 {
            n,
            big_n,
            bruteforce,
            tolerances,
            outputs,
        } => {
            let cfg = L1CounterexampleConfig::new(n, big_n)?;
            let bound = counterexamples::l1_counterexample_lower_bound(&cfg);
            let brute = if bruteforce {
                Some(counterexamples::l1_counterexample_bruteforce(&cfg)?)
            } else {
                None
            };
            let opts = options(&tolerances, None, false)?;

            // Uniform partitions into 2^k - 1 intervals up to m.
            let schedule: Vec<_> = (1..n)
                .map(|k| setint::partition::uniform_partition((1usize << k) - 1, TagRule::Mid))
                .collect::<setint::Result<_>>()?;
            let f = counterexamples::l1_counterexample_eval(&cfg);
            let simplex = f.eval(0.0)?;
            let hull_report =
                integrate::integrate(&f.convex_hull(), &schedule, Some(&simplex), &opts)?;
            let conv_distance = hull_report
                .rows
                .iter()
                .filter_map(|r| r.distance)
                .fold(0.0, f64::max);
            let witness_report = integrate::integrate(&f, &schedule, Some(&simplex), &opts)?;
            let verdict = match witness_report.verdict {
                Verdict::Converged { .. } => "converged",
                Verdict::Diverged { .. } => "diverged",
                Verdict::Inconclusive => "inconclusive",
            };
            let agree = brute.is_none_or(|b| (b - bound).abs() <= 1e-12);
            let out = json!({
                "n": n,
                "N": big_n,
                "intervals": cfg.intervals(),
                "witnessLen": cfg.witness_len(),
                "bound": bound,
                "bruteforce": brute,
                "generalBound": GENERAL_LOWER_BOUND,
                "convDistance": conv_distance,
                "verdict": verdict,
            });
            let mut summary = format!(
                "l1 counterexample n = {n}, N = {big_n}\ndist(y, S) = {bound:.12} (general bound {GENERAL_LOWER_BOUND:.7})\n"
            );
            if let Some(b) = brute {
                summary += &format!("enumeration: {b:.12}\n");
            }
            summary += &format!("conv F distance to simplex: {conv_distance:e}\nF: {verdict}\n");
            emit(&outputs, &out, &summary)?;
            Ok(satisfied_code(agree))
        }
    }
}
