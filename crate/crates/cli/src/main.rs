use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nearmetz_core::dense::spectral_abscissa_metzler;
use nearmetz_core::io::{read_matrix, write_matrix};
use nearmetz_core::{
    generate, hurwitz_certificate_metzler, is_metzler, lower_bound_metzler_cone,
    solve_nearest_metzler, CertBundle, ConeMode, InitStrategy, InstanceKind, IterationRecord,
    SolveStatus, SolverOptions,
};
use serde::Serialize;

const SCHEMA_VERSION: u32 = 1;
const TRACE_HEADER: &str = "# nearmetz-trace v1";
const TRACE_COLUMNS: &str = "iter,obj_after_jr,obj_after_q,jr_inner_iters,q_inner_iters,wall_ms";

const EXIT_INPUT: u8 = 1;
const EXIT_UNCERTIFIED: u8 = 2;
const EXIT_NOT_HURWITZ: u8 = 3;

#[derive(Parser)]
#[command(name = "nearmetz", version, about = "Nearest stable Metzler matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a nearby Hurwitz stable Metzler matrix.
    Solve(SolveArgs),
    /// Metzler membership and Hurwitz certificate of a matrix.
    Check(InputArgs),
    /// Squared distance to the Metzler cone, a lower bound for `solve`.
    Bound(InputArgs),
    /// Write a reproducible random instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file (.csv, or .json for {"rows","cols","data"}).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Psd,
    Dd,
    Sdd,
}

impl From<ModeArg> for ConeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Psd => ConeMode::Psd,
            ModeArg::Dd => ConeMode::Dd,
            ModeArg::Sdd => ConeMode::Sdd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    MetzlerShift,
    Lyapunov,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Stable,
    Unstable,
    MetzlerStable,
    MetzlerUnstable,
}

impl From<KindArg> for InstanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Stable => InstanceKind::Stable,
            KindArg::Unstable => InstanceKind::Unstable,
            KindArg::MetzlerStable => InstanceKind::MetzlerStable,
            KindArg::MetzlerUnstable => InstanceKind::MetzlerUnstable,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "psd")]
    mode: ModeArg,
    #[arg(long, default_value_t = 500)]
    max_outer: usize,
    /// Relative objective decrease treated as a stall.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Initial ADMM penalty.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Lower bound on the entries of q.
    #[arg(long, default_value_t = 0.0)]
    eps_q: f64,
    /// Strictness floor on R.
    #[arg(long, default_value_t = 1e-9)]
    delta: f64,
    #[arg(long, value_enum, default_value = "metzler-shift")]
    init: InitArg,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Result JSON; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: i64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Output file; the extension picks CSV or JSON.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct CertificateOut<'a> {
    zeta: &'a [f64],
    z: &'a [f64],
    pdiag: &'a [f64],
}

impl<'a> From<&'a CertBundle> for CertificateOut<'a> {
    fn from(c: &'a CertBundle) -> Self {
        Self {
            zeta: &c.zeta,
            z: &c.zvec,
            pdiag: &c.pdiag,
        }
    }
}

#[derive(Serialize)]
struct ResultFile<'a> {
    schema_version: u32,
    input_path: String,
    mode: &'static str,
    options: &'a SolverOptions,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    q: &'a [f64],
    dist_sq: f64,
    lower_bound: f64,
    certified: bool,
    certificate: Option<CertificateOut<'a>>,
    trace: &'a [IterationRecord],
    status: SolveStatus,
    wall_time_ms: f64,
    hint: Option<&'a str>,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    input_path: String,
    is_metzler: bool,
    certified: bool,
    certificate: Option<CertificateOut<'a>>,
    /// Perron estimate; only defined for Metzler input.
    spectral_abscissa: Option<f64>,
    spectral_abscissa_converged: Option<bool>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; exit code 2 means "uncertified"
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Check(args) => cmd_check(&args.input),
        Command::Bound(args) => cmd_bound(&args.input),
        Command::Gen(args) => cmd_gen(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load(path: &Path) -> Result<nearmetz_core::DenseMatrix> {
    let m = read_matrix(path).with_context(|| format!("reading {}", path.display()))?;
    if !m.is_square() {
        bail!("{}: matrix is {}x{}, expected square", path.display(), m.rows(), m.cols());
    }
    Ok(m)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn trace_csv(records: &[IterationRecord]) -> String {
    let mut s = format!("{TRACE_HEADER}\n{TRACE_COLUMNS}\n");
    for r in records {
        s.push_str(&format!(
            "{},{:?},{:?},{},{},{:?}\n",
            r.iter, r.obj_after_jr, r.obj_after_q, r.jr_inner_iters, r.q_inner_iters, r.wall_ms
        ));
    }
    s
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let a = load(&args.input)?;
    let mut opts = SolverOptions {
        mode: args.mode.into(),
        max_outer: args.max_outer,
        rel_tol: args.tol,
        init: match args.init {
            InitArg::MetzlerShift => InitStrategy::MetzlerShift,
            InitArg::Lyapunov => InitStrategy::LyapunovDh,
        },
        ..SolverOptions::default()
    };
    opts.subproblem.rho = args.rho;
    opts.subproblem.eps_q = args.eps_q;
    opts.subproblem.delta = args.delta;
    opts.validate().context("invalid options")?;

    let start = Instant::now();
    let res = solve_nearest_metzler(&a, &opts)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    if res.init_fallback {
        eprintln!("warning: input is not stable; lyapunov init replaced by metzler-shift");
    }
    if let Some(h) = &res.hint {
        eprintln!("note: {h}");
    }

    if let Some(p) = &args.trace {
        fs::write(p, trace_csv(&res.trace.records))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    let file = ResultFile {
        schema_version: SCHEMA_VERSION,
        input_path: args.input.display().to_string(),
        mode: opts.mode.as_str(),
        options: &opts,
        x: res.x.to_nested(),
        j: res.factors.j.to_nested(),
        r: res.factors.r.to_nested(),
        q: &res.factors.q,
        dist_sq: res.dist_sq,
        lower_bound: res.lower_bound,
        certified: res.certified,
        certificate: res.certificate.as_ref().map(Into::into),
        trace: &res.trace.records,
        status: res.status,
        wall_time_ms,
        hint: res.hint.as_deref(),
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&file)?)?;
    Ok(if res.certified { 0 } else { EXIT_UNCERTIFIED })
}

fn cmd_check(input: &Path) -> Result<u8> {
    let x = load(input)?;
    let metzler = is_metzler(&x, nearmetz_core::certify::METZLER_TOL);
    let (cert, abscissa) = if metzler {
        (hurwitz_certificate_metzler(&x)?, Some(spectral_abscissa_metzler(&x)?))
    } else {
        (None, None)
    };
    let report = CheckReport {
        input_path: input.display().to_string(),
        is_metzler: metzler,
        certified: cert.is_some(),
        certificate: cert.as_ref().map(Into::into),
        spectral_abscissa: abscissa.as_ref().map(|e| e.value),
        spectral_abscissa_converged: abscissa.as_ref().map(|e| e.converged),
    };
    emit(None, &serde_json::to_string_pretty(&report)?)?;
    Ok(if metzler && cert.is_some() { 0 } else { EXIT_NOT_HURWITZ })
}

fn cmd_bound(input: &Path) -> Result<u8> {
    let a = load(input)?;
    let lb = lower_bound_metzler_cone(&a)?;
    emit(None, &serde_json::json!({ "lower_bound": lb }).to_string())?;
    Ok(0)
}

fn cmd_gen(args: &GenArgs) -> Result<u8> {
    if args.n < 1 {
        bail!("--n must be at least 1 (got {})", args.n);
    }
    let m = generate(args.n as usize, args.seed, args.kind.into())?;
    write_matrix(&args.output, &m).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(0)
}
