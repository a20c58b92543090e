//! Command-line front end: `solve`, `generate`, `analyze`, `benchmark` and
//! `replay`.
//!
//! Every command that writes files also writes `manifest.json` next to them,
//! holding the full configuration, dataset fingerprints and timestamps; the
//! `replay` command re-executes a manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{self, IstaConfig};
use crate::data_io::{self, Dataset, LabelMap, Normalization, SyntheticSpec};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;
use crate::objective::{LeastSquaresLoss, LogisticLoss, Problem, QuadraticLoss};
use crate::solver::{self, SolveReport, SolverConfig, Termination};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ITER_CAP: i32 = 2;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "oba", version, about = "Orthant-based adaptive solver for l1-regularized problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write a trace, a report and a manifest.
    Solve(SolveArgs),
    /// Write a synthetic dataset in LIBSVM format.
    Generate(GenerateArgs),
    /// Print the dataset shape and the diagonal dominance of the Hessian at 0.
    Analyze(AnalyzeArgs),
    /// Fix φ* with a tight reference solve, then trace each solver against it.
    Benchmark(BenchmarkArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Logistic,
    /// Least squares `(1/2N)‖Ax − b‖²`.
    Lasso,
    /// `½xᵀHx + cᵀx`; each data row is a row of `H` and its label is `c_i`.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Oba,
    Ista,
}

impl SolverKind {
    fn name(self) -> &'static str {
        match self {
            SolverKind::Oba => "oba",
            SolverKind::Ista => "ista",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeArg {
    #[default]
    None,
    Maxabs,
    Minmax,
}

impl From<NormalizeArg> for Normalization {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::Maxabs => Normalization::MaxAbs,
            NormalizeArg::Minmax => Normalization::MinMax,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// Stop when ‖g(x)‖∞ falls to this value.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Outer iteration cap [default: 1000 for oba, 100000 for ista].
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Relative residual tolerance of the subspace CG solves.
    #[arg(long, default_value_t = 0.1)]
    pub cg_tol: f64,
    /// Lipschitz constant of ∇f; estimated when omitted.
    #[arg(long = "L", value_name = "L")]
    pub lipschitz: Option<f64>,
}

impl SolverArgs {
    fn oba_config(&self, time_limit: Option<Duration>) -> SolverConfig {
        SolverConfig {
            eta: self.eta,
            eps: self.eps,
            cg_rel_tol: self.cg_tol,
            outer_tol: self.tol,
            max_outer_iters: self.max_iters.unwrap_or(1000),
            lipschitz_override: self.lipschitz,
            time_limit,
            ..SolverConfig::default()
        }
    }

    fn ista_config(&self, time_limit: Option<Duration>) -> IstaConfig {
        IstaConfig {
            outer_tol: self.tol,
            max_iters: self.max_iters.unwrap_or(100_000),
            lipschitz_override: self.lipschitz,
            time_limit,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub loss: LossKind,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Oba)]
    pub solver: SolverKind,
    /// Ridge term (λ/2)‖x‖² added to the loss.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    pub normalize: NormalizeArg,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Known optimal value; adds relative errors to the trace.
    #[arg(long)]
    pub phi_star: Option<f64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_cap: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = LossKind::Logistic)]
    pub loss: LossKind,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    pub normalize: NormalizeArg,
    /// Largest dimension for which the dominance measure is computed.
    #[arg(long, default_value_t = diagnostics::DEFAULT_DOMINANCE_CAP)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum)]
    pub loss: LossKind,
    /// Dataset file; repeat for several.
    #[arg(long)]
    pub data: Vec<PathBuf>,
    /// Synthetic dataset of this dimension (with --seed); repeat for several.
    #[arg(long)]
    pub synthetic: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub mu: f64,
    /// Comma-separated solvers to trace.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolverKind::Oba, SolverKind::Ista])]
    pub solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    pub normalize: NormalizeArg,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Tolerance of the reference solve that fixes φ*.
    #[arg(long, default_value_t = 1e-10)]
    pub ref_tol: f64,
    /// Wall-clock limit of the reference solve in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_cap: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the re-run.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub name: String,
    /// Absent for in-memory synthetic data.
    pub path: Option<PathBuf>,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub datasets: Vec<DatasetFingerprint>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl RunManifest {
    fn start(command: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(RunManifest {
            command: command.into(),
            config: serde_json::to_value(config)
                .map_err(|e| Error::Internal(format!("cannot serialize config: {e}")))?,
            datasets: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix_ms: unix_ms(),
            finished_unix_ms: 0,
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    fn finish(mut self, dir: &Path) -> Result<()> {
        self.finished_unix_ms = unix_ms();
        write_json(&dir.join(MANIFEST_FILE), &self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: bad manifest: {e}", path.display())))
    }
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn label_map(loss: LossKind) -> LabelMap {
    match loss {
        LossKind::Logistic => LabelMap::Binary,
        LossKind::Lasso | LossKind::Quadratic => LabelMap::Raw,
    }
}

/// Reads a dataset file and fingerprints its bytes.
fn load_dataset(path: &Path, loss: LossKind) -> Result<(Dataset, DatasetFingerprint)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::InvalidInput(format!("{} is not UTF-8 text", path.display())))?;
    let ds = data_io::parse_libsvm(&text, label_map(loss), path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    let fp = DatasetFingerprint {
        name,
        path: Some(path.to_path_buf()),
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((ds, fp))
}

fn synthetic_name(n: usize, seed: u64) -> String {
    format!("synthetic_n{n}_seed{seed}")
}

fn synthetic_dataset(n: usize, seed: u64) -> Result<(Dataset, DatasetFingerprint)> {
    let ds = data_io::generate_synthetic(&SyntheticSpec { n, seed })?;
    let mut buf = Vec::new();
    data_io::write_libsvm_to(&ds, &mut buf).map_err(|e| Error::Internal(e.to_string()))?;
    let fp = DatasetFingerprint {
        name: synthetic_name(n, seed),
        path: None,
        sha256: sha256_hex(&buf),
    };
    Ok((ds, fp))
}

/// Builds `f + μ‖·‖₁` for the chosen loss.
pub fn build_problem(loss: LossKind, ds: Dataset, ridge: f64, mu: f64) -> Result<Problem> {
    match loss {
        LossKind::Logistic => Problem::new(LogisticLoss::new(ds.a, ds.targets, ridge)?, mu),
        LossKind::Lasso => Problem::new(LeastSquaresLoss::new(ds.a, ds.targets, ridge)?, mu),
        LossKind::Quadratic => {
            let h = square_up(ds.a)?;
            Problem::new(QuadraticLoss::new(h, ds.targets, ridge)?, mu)
        }
    }
}

/// LIBSVM drops trailing all-zero columns; a quadratic's `H` has as many
/// columns as rows.
fn square_up(a: CsrMatrix) -> Result<CsrMatrix> {
    let n = a.n_rows();
    if a.n_cols() == n {
        return Ok(a);
    }
    if a.n_cols() > n {
        return Err(Error::InvalidInput(format!(
            "quadratic data has {} rows but {} columns",
            n,
            a.n_cols()
        )));
    }
    CsrMatrix::new(
        n,
        n,
        a.indptr().to_vec(),
        a.indices().to_vec(),
        a.values().to_vec(),
    )
}

fn run_solver(
    kind: SolverKind,
    problem: &Problem,
    args: &SolverArgs,
    time_limit: Option<Duration>,
) -> Result<SolveReport> {
    let x0 = vec![0.0; problem.dim()];
    match kind {
        SolverKind::Oba => solver::solve(problem, &x0, &args.oba_config(time_limit)),
        SolverKind::Ista => baseline::ista_solve(problem, &x0, &args.ista_config(time_limit)),
    }
}

fn seconds_limit(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s)
            .map_err(|_| Error::Config(format!("time cap must be a non-negative number, got {s}")))
    })
    .transpose()
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iter: usize,
    seconds: f64,
    phi: f64,
    rel_err: Option<f64>,
    g_inf: f64,
    nnz: usize,
    cycle_j: usize,
    cg_iters: usize,
    alpha: Option<f64>,
    alpha_bar: Option<f64>,
}

pub const TRACE_HEADER: [&str; 10] = [
    "iter", "seconds", "phi", "rel_err", "g_inf", "nnz", "cycle_j", "cg_iters", "alpha", "alpha_bar",
];

/// CSV trace with one row for `x⁰` and one per iteration.
pub fn write_trace_csv(path: &Path, report: &SolveReport, phi_star: Option<f64>) -> Result<()> {
    let points = diagnostics::convergence_trace(report, phi_star)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for (k, p) in points.iter().enumerate() {
        let step = k.checked_sub(1).map(|i| &report.trace[i]);
        w.serialize(TraceRow {
            iter: p.iter,
            seconds: p.seconds,
            phi: p.phi,
            rel_err: p.rel_err,
            g_inf: p.g_inf,
            nnz: p.nnz,
            cycle_j: step.map_or(0, |t| t.cycle_j),
            cg_iters: step.map_or(0, |t| t.cg_iters),
            alpha: step.map(|t| t.alpha),
            alpha_bar: step.map(|t| t.alpha_bar),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    manifest: &'a str,
    dataset: &'a str,
    solver: &'a str,
    termination: &'a str,
    iterations: usize,
    phi: f64,
    phi_star: Option<f64>,
    rel_err: Option<f64>,
    g_inf: f64,
    nnz: usize,
    sparsity_percent: f64,
    fallback_count: usize,
    lipschitz: f64,
    seconds: f64,
    x: &'a [f64],
}

fn write_report(
    path: &Path,
    dataset: &str,
    report: &SolveReport,
    phi_star: Option<f64>,
) -> Result<()> {
    let rel_err = phi_star
        .map(|s| diagnostics::relative_error(report.phi, s))
        .transpose()?;
    write_json(
        path,
        &ReportJson {
            manifest: MANIFEST_FILE,
            dataset,
            solver: &report.solver,
            termination: report.termination.as_str(),
            iterations: report.iterations,
            phi: report.phi,
            phi_star,
            rel_err,
            g_inf: report.g_inf,
            nnz: report.nnz(),
            sparsity_percent: diagnostics::sparsity_percent(&report.x, 0.0),
            fallback_count: report.fallback_count,
            lipschitz: report.lipschitz,
            seconds: report.seconds,
            x: &report.x,
        },
    )
}

fn exit_for(t: Termination) -> i32 {
    match t {
        Termination::Tolerance => EXIT_OK,
        Termination::MaxIterations | Termination::TimeLimit => EXIT_ITER_CAP,
        Termination::NonFinite => EXIT_INPUT,
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let mut manifest = RunManifest::start("solve", args, None)?;
    let (ds, fp) = load_dataset(&args.data, args.loss)?;
    let ds = data_io::normalize(&ds, args.normalize.into());
    let problem = build_problem(args.loss, ds, args.ridge, args.mu)?;
    let report = run_solver(
        args.solver,
        &problem,
        &args.solver_args,
        seconds_limit(args.time_cap)?,
    )?;

    ensure_dir(&args.out)?;
    write_trace_csv(&args.out.join("trace.csv"), &report, args.phi_star)?;
    write_report(&args.out.join("report.json"), &fp.name, &report, args.phi_star)?;
    manifest.datasets.push(fp);
    manifest.outputs = vec!["trace.csv".into(), "report.json".into()];
    manifest.finish(&args.out)?;

    println!("solver       {}", report.solver);
    println!("termination  {}", report.termination.as_str());
    println!("iterations   {}", report.iterations);
    println!("phi          {:.12e}", report.phi);
    println!("g_inf        {:.3e}", report.g_inf);
    println!("nnz          {} / {}", report.nnz(), report.x.len());
    println!(
        "sparsity     {:.2}%",
        diagnostics::sparsity_percent(&report.x, 0.0)
    );
    println!("fallbacks    {}", report.fallback_count);
    println!("seconds      {:.3}", report.seconds);
    Ok(exit_for(report.termination))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let mut manifest = RunManifest::start("generate", args, Some(args.seed))?;
    let (ds, fp) = synthetic_dataset(args.n, args.seed)?;
    ensure_dir(&args.out)?;
    let file = format!("{}.svm", fp.name);
    data_io::write_libsvm(&ds, args.out.join(&file))?;
    manifest.datasets.push(fp);
    manifest.outputs.push(file.clone());
    manifest.finish(&args.out)?;
    println!("{}", args.out.join(file).display());
    Ok(EXIT_OK)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let (ds, _) = load_dataset(&args.data, args.loss)?;
    let ds = data_io::normalize(&ds, args.normalize.into());
    let (rows, cols, nnz) = (ds.n_samples(), ds.n_features(), ds.a.nnz());
    println!("samples      {rows}");
    println!("features     {cols}");
    println!("nnz          {nnz}");
    println!(
        "density      {:.6}",
        nnz as f64 / (rows.max(1) * cols.max(1)) as f64
    );
    if cols > args.cap {
        return Err(Error::Refused(format!(
            "n = {cols} exceeds the dominance cap {}; pass --cap {cols} to compute it anyway",
            args.cap
        )));
    }
    // μ does not enter the Hessian
    let problem = build_problem(args.loss, ds, args.ridge, 1.0)?;
    let d = diagnostics::diagonal_dominance(problem.objective(), &vec![0.0; cols], args.cap)?;
    println!("dominance    {d:.6}");
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ReferenceJson<'a> {
    manifest: &'a str,
    dataset: &'a str,
    phi_star: f64,
    approximate: bool,
    reference_termination: &'a str,
    reference_iterations: usize,
    reference_g_inf: f64,
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<i32> {
    if args.data.is_empty() && args.synthetic.is_empty() {
        return Err(Error::Config(
            "benchmark needs at least one --data or --synthetic dataset".into(),
        ));
    }
    if args.solvers.is_empty() {
        return Err(Error::Config("benchmark needs at least one solver".into()));
    }
    let mut manifest = RunManifest::start("benchmark", args, Some(args.seed))?;
    ensure_dir(&args.out)?;
    let ref_limit = seconds_limit(Some(args.time_cap))?;

    let mut sources: Vec<Result<(Dataset, DatasetFingerprint)>> = Vec::new();
    for path in &args.data {
        sources.push(load_dataset(path, args.loss));
    }
    for &n in &args.synthetic {
        sources.push(synthetic_dataset(n, args.seed));
    }

    let mut exit = EXIT_OK;
    for source in sources {
        let (ds, fp) = source?;
        let ds = data_io::normalize(&ds, args.normalize.into());
        let problem = build_problem(args.loss, ds, args.ridge, args.mu)?;

        let ref_args = SolverArgs {
            tol: args.ref_tol,
            max_iters: Some(usize::MAX),
            ..args.solver_args.clone()
        };
        let reference = run_solver(SolverKind::Oba, &problem, &ref_args, ref_limit)?;
        let mut runs = Vec::new();
        for &kind in &args.solvers {
            runs.push((kind, run_solver(kind, &problem, &args.solver_args, None)?));
        }

        let approximate = reference.termination != Termination::Tolerance;
        let mut phi_star = reference.phi;
        if approximate {
            for (_, r) in &runs {
                phi_star = phi_star.min(r.phi);
            }
            manifest.notes.push(format!(
                "{}: reference solve stopped by {}; phi_star is approximate",
                fp.name,
                reference.termination.as_str()
            ));
        }

        let ref_file = format!("{}.reference.json", fp.name);
        write_json(
            &args.out.join(&ref_file),
            &ReferenceJson {
                manifest: MANIFEST_FILE,
                dataset: &fp.name,
                phi_star,
                approximate,
                reference_termination: reference.termination.as_str(),
                reference_iterations: reference.iterations,
                reference_g_inf: reference.g_inf,
            },
        )?;
        manifest.outputs.push(ref_file);

        for (kind, report) in &runs {
            let trace_file = format!("{}.{}.trace.csv", fp.name, kind.name());
            let report_file = format!("{}.{}.report.json", fp.name, kind.name());
            write_trace_csv(&args.out.join(&trace_file), report, Some(phi_star))?;
            write_report(&args.out.join(&report_file), &fp.name, report, Some(phi_star))?;
            manifest.outputs.push(trace_file);
            manifest.outputs.push(report_file);
            println!(
                "{:<28} {:<5} {:<10} iters {:>7}  phi {:.12e}  rel_err {:.3e}  {:.3}s",
                fp.name,
                kind.name(),
                report.termination.as_str(),
                report.iterations,
                report.phi,
                diagnostics::relative_error(report.phi, phi_star)?,
                report.seconds
            );
            if exit_for(report.termination) != EXIT_OK {
                exit = exit.max(exit_for(report.termination));
            }
        }
        manifest.datasets.push(fp);
    }
    manifest.finish(&args.out)?;
    Ok(exit)
}

/// Re-runs a recorded command into `out`, refusing if a dataset file changed.
pub fn cmd_replay(args: &ReplayArgs) -> Result<i32> {
    let manifest = RunManifest::read(&args.manifest)?;
    for ds in &manifest.datasets {
        if let Some(path) = &ds.path {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if sha256_hex(&bytes) != ds.sha256 {
                return Err(Error::InvalidInput(format!(
                    "{} changed since the manifest was written",
                    path.display()
                )));
            }
        }
    }
    let bad = |e: serde_json::Error| Error::InvalidInput(format!("bad manifest config: {e}"));
    let out = args.out.clone();
    match manifest.command.as_str() {
        "solve" => {
            let mut a: SolveArgs = serde_json::from_value(manifest.config).map_err(bad)?;
            a.out = out;
            cmd_solve(&a)
        }
        "generate" => {
            let mut a: GenerateArgs = serde_json::from_value(manifest.config).map_err(bad)?;
            a.out = out;
            cmd_generate(&a)
        }
        "benchmark" => {
            let mut a: BenchmarkArgs = serde_json::from_value(manifest.config).map_err(bad)?;
            a.out = out;
            cmd_benchmark(&a)
        }
        other => Err(Error::InvalidInput(format!(
            "manifest command {other:?} cannot be replayed"
        ))),
    }
}

/// Dispatches a parsed command line and maps errors to exit code 1.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            EXIT_INPUT
        }
    }
}
