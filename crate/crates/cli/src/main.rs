use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfine_core::calculi::{run_suite, CalculusKind, CalculusRequest, ContourParams, Mode, SuiteConfig};
use qfine_core::contour::QuadratureOptions;
use qfine_core::qlinalg::{s_spectrum, CommutingTuple, TupleJson};
use qfine_core::slice::diff::DEFAULT_STEP;
use qfine_core::slice::{fueter_diagrams, FunctionDescriptor, Side, SliceFunction};
use qfine_core::{Error, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const EXIT_IDENTITY: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_USAGE: u8 = 1;

#[derive(Parser)]
#[command(name = "qfine", version, about = "Quaternionic fine-structure functional calculi on commuting matrix tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite on random commuting tuples.
    Verify(VerifyArgs),
    /// Evaluate a calculus of a function at a tuple.
    Calculus(CalculusArgs),
    /// Print the S-spectrum of a tuple as (center, radius) pairs.
    Spectrum(SpectrumArgs),
    /// Check the Fueter diagrams of a function at random points.
    Fueter(FueterArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    S,
    Q,
    F,
    P2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bounded,
    UnboundedTransform,
    UnboundedIntegral,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Args)]
struct Quadrature {
    /// Relative tolerance of the contour quadrature.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_rtol)]
    rtol: f64,
    /// Maximum trapezoid nodes per circle.
    #[arg(long, default_value_t = 1 << 14)]
    nodes_cap: usize,
    /// Contour margin, relative to the sphere size.
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    margin: f64,
}

impl Quadrature {
    fn params(&self) -> ContourParams {
        ContourParams {
            margin: self.margin,
            quad: QuadratureOptions { rtol: self.rtol, nodes_cap: self.nodes_cap, ..Default::default() },
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to json for reports and md (plain text) for printed values.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..=16))]
    dim: u16,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    quad: Quadrature,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CalculusArgs {
    /// Tuple JSON file.
    tuple: PathBuf,
    /// Function descriptor JSON file.
    function: PathBuf,
    #[arg(long, value_enum, ignore_case = true, default_value_t = KindArg::S)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Bounded)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    side: SideArg,
    /// Real point of the resolvent set, required by the unbounded modes.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[command(flatten)]
    quad: Quadrature,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    tuple: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FueterArgs {
    function: PathBuf,
    /// Number of random sample points.
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn parse_rtol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    // tolerances below 1e-14 are accepted and surface as NoConvergence
    if v > 0.0 && v < 1e-2 {
        Ok(v)
    } else {
        Err("rtol must lie in (0, 1e-2)".into())
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be positive".into())
    }
}

/// A failed command: exit code and message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_numeric() => EXIT_NUMERIC,
            Error::Invalid(_) => EXIT_USAGE,
            _ => EXIT_PRECONDITION,
        };
        Failure(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_tuple(path: &Path) -> Result<CommutingTuple, Failure> {
    let j: TupleJson = serde_json::from_str(&read(path)?).map_err(|e| io_failure(path, e))?;
    Ok(CommutingTuple::from_json(&j)?)
}

fn load_function(path: &Path) -> Result<SliceFunction, Failure> {
    let d = FunctionDescriptor::from_json(&read(path)?).map_err(|e| io_failure(path, e))?;
    Ok(d.to_function()?)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let mut cfg = SuiteConfig::new(a.dim as usize, a.trials as usize, a.seed);
    cfg.params = a.quad.params();
    let report = run_suite(&cfg)?;
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Md => report.to_markdown(),
    };
    emit(a.output.out.as_deref(), &text)?;
    for e in report.failures() {
        eprintln!("FAIL {} trial {}: {:.3e} > {:.0e}", e.identity.as_str(), e.trial, e.max_residual, e.threshold);
    }
    Ok(if report.pass { 0 } else { EXIT_IDENTITY })
}

fn cmd_calculus(a: &CalculusArgs) -> Result<u8, Failure> {
    let t = load_tuple(&a.tuple)?;
    let f = load_function(&a.function)?;
    let kind = match a.kind {
        KindArg::S => CalculusKind::S,
        KindArg::Q => CalculusKind::Q,
        KindArg::F => CalculusKind::F,
        KindArg::P2 => CalculusKind::P2,
    };
    let mode = match a.mode {
        ModeArg::Bounded => Mode::Bounded,
        ModeArg::UnboundedTransform => Mode::UnboundedTransform,
        ModeArg::UnboundedIntegral => Mode::UnboundedIntegral,
    };
    let side = match a.side {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
    };
    let req = CalculusRequest { kind, mode, side, f, t, alpha: a.alpha, params: a.quad.params() };
    let out = req.run()?;
    let [t0, t1, t2, t3] = out.op.components();
    let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
    let result = TupleJson { n: out.op.n(), t0: rows(&t0), t1: rows(&t1), t2: rows(&t2), t3: rows(&t3) };
    let doc = json!({
        "kind": kind.as_str(),
        "mode": mode,
        "side": if side == Side::Left { "left" } else { "right" },
        "alpha": a.alpha,
        "J": out.contour.j,
        "result": result,
        "contour": out.contour,
        "nodes_used": out.nodes_used,
    });
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    Ok(0)
}

/// Shortest of `{:.12}` with trailing zeros removed.
fn short(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<u8, Failure> {
    let t = load_tuple(&a.tuple)?;
    let spec = s_spectrum(&t)?;
    let text = match a.output.format.unwrap_or(Format::Md) {
        Format::Json => serde_json::to_string_pretty(&spec.spheres).expect("serializable") + "\n",
        Format::Md => spec.spheres.iter().map(|s| format!("({}, {})\n", short(s.center), short(s.radius))).collect(),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

const DIAGRAMS: [&str; 3] = ["laplacian_of_d", "d_squared_of_dbar", "d_of_laplacian"];

fn cmd_fueter(a: &FueterArgs) -> Result<u8, Failure> {
    let f = load_function(&a.function)?;
    if !f.is_intrinsic() {
        return Err(Error::NotIntrinsic("the Fueter diagrams need an intrinsic function".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst = [0.0f64; 3];
    let mut used = 0;
    while used < a.points {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        // points too close to a pole or to the real axis are redrawn
        if q.imag_norm() < 0.05 || f.poles().iter().any(|&p| q.dist(Quaternion::real(p)) < 0.1) {
            continue;
        }
        let r = fueter_diagrams(&f, q, DEFAULT_STEP)?;
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v.norm());
        }
        used += 1;
    }
    let text = match a.output.format.unwrap_or(Format::Md) {
        Format::Json => {
            let doc = json!({
                "points": a.points,
                "seed": a.seed,
                DIAGRAMS[0]: worst[0],
                DIAGRAMS[1]: worst[1],
                DIAGRAMS[2]: worst[2],
            });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Md => {
            DIAGRAMS.iter().zip(worst).map(|(n, w)| format!("{n}: {w:.3e}\n")).collect()
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

fn init_threads() {
    if let Some(n) = std::env::var("QFINE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on bad usage, which is taken by identity failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    init_threads();
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Calculus(a) => cmd_calculus(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Fueter(a) => cmd_fueter(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
