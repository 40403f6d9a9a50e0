//! `kdq` command-line front end.
//!
//! Exit codes: 0 success (or every audit passed), 1 some audit failed, 2 invalid input,
//! 3 singular overlap during reconstruction, 4 degenerate post-selection.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kdq::audit::{
    check_condition1, check_condition2, check_condition3, check_span, kd_rep, make_condition2_violator, mixed_kd_rep,
    AuditReport, QuasiProbRep,
};
use kdq::io::{self as kio, FormatError, KdFile, LoadedState, StateFile, WignerFile};
use kdq::weak::{coupling_sweep, PointerConfig};
use kdq::wigner::{condition3_violation_report, discrete_wigner, wigner_as_rep};
use kdq::kd::kd_inverse_with;
use kdq::{kd_transform, Error, Ordering, Tolerances};

#[derive(Parser)]
#[command(name = "kdq", version, about = "Kirkwood-Dirac quasi-probabilities, representation audits and weak values")]
struct Cli {
    /// Override every validation tolerance (also the audit pass threshold).
    #[arg(long, global = true, env = "KDQ_TOL")]
    tol: Option<f64>,
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Operator ordering: AB projects on a first, BA on b first.
    #[arg(long, global = true, default_value = "AB")]
    ordering: Ordering,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KD table and both marginals of a state.
    Kd(KdArgs),
    /// Rebuild the density matrix from a KD file written by `kd`.
    Reconstruct {
        #[arg(long)]
        kd: PathBuf,
    },
    /// Audit a candidate representation: kd, kd-ba, mixed:<lambda>, violator:<eps>, wigner.
    Audit(AuditArgs),
    /// Weak-measurement pointer sweep as CSV.
    Weak(WeakArgs),
    /// Discrete Wigner table of an odd-dimensional state.
    Wigner(WignerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct KdArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value = "computational")]
    basis_a: String,
    #[arg(long, default_value = "fourier")]
    basis_b: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct AuditArgs {
    rep: String,
    /// Hilbert-space dimension (default 5 for wigner, 4 otherwise).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value = "computational")]
    basis_a: String,
    #[arg(long, default_value = "fourier")]
    basis_b: String,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    c1: bool,
    #[arg(long)]
    c2: bool,
    #[arg(long)]
    c3: bool,
    #[arg(long)]
    span: bool,
    /// Random orthogonal states per basis vector for the sampled part of C3.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

#[derive(Args)]
struct WeakArgs {
    /// Pure input state.
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    a_index: usize,
    #[arg(long, default_value = "computational")]
    basis_a: String,
    #[arg(long)]
    b_index: usize,
    #[arg(long, default_value = "fourier")]
    basis_b: String,
    /// Comma-separated couplings g (pointer position units); may be empty.
    #[arg(long, allow_hyphen_values = true)]
    couplings: String,
    #[arg(long, default_value_t = 512)]
    grid_points: usize,
    /// Window length L (default 20 sigma).
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args)]
struct WignerArgs {
    #[arg(long)]
    state: PathBuf,
    /// Include the list of cells that are non-zero at zero-probability positions.
    #[arg(long)]
    report: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// A failure carrying its exit code and error object.
struct Failure {
    exit: u8,
    code: String,
    message: String,
    context: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::SingularOverlap { .. } => 3,
            Error::DegeneratePostselection { .. } => 4,
            _ => 2,
        };
        let context = match &e {
            Error::SingularOverlap { pair: Some((a, b)), magnitude } => json!({ "a": a, "b": b, "magnitude": magnitude }),
            Error::DimMismatch { expected, found } => json!({ "expected": expected, "found": found }),
            Error::DegeneratePostselection { probability, threshold } => {
                json!({ "probability": probability, "threshold": threshold })
            }
            Error::EvenDimension { dim } => json!({ "dim": dim }),
            _ => Value::Null,
        };
        Failure { exit, code: e.code().to_owned(), message: e.to_string(), context }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Invalid(inner) => inner.into(),
            other => Failure { exit: 2, code: other.code().to_owned(), message: other.to_string(), context: Value::Null },
        }
    }
}

fn usage(code: &str, message: impl Into<String>) -> Failure {
    Failure { exit: 2, code: code.to_owned(), message: message.into(), context: Value::Null }
}

struct Globals {
    tol: Tolerances,
    audit_tol: f64,
    seed: u64,
    ordering: Ordering,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals {
        tol: cli.tol.map(Tolerances::uniform).unwrap_or_default(),
        audit_tol: cli.tol.unwrap_or(1e-10),
        seed: cli.seed,
        ordering: cli.ordering,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Kd(args) => run_kd(&globals, args, &mut out),
        Command::Reconstruct { kd } => run_reconstruct(&globals, kd, &mut out),
        Command::Audit(args) => run_audit(&globals, args, &mut out),
        Command::Weak(args) => run_weak(&globals, args, &mut out),
        Command::Wigner(args) => run_wigner(&globals, args, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let obj = json!({ "code": f.code, "message": f.message, "context": f.context });
            eprintln!("{obj}");
            ExitCode::from(f.exit)
        }
    }
}

fn write_out(out: &mut impl Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| usage("write_error", e.to_string()))
}

fn run_kd(g: &Globals, args: KdArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let rho = kio::load_state(&args.state, &g.tol)?.density();
    let basis_a = kio::resolve_basis(&args.basis_a, rho.dim(), &g.tol)?;
    let basis_b = kio::resolve_basis(&args.basis_b, rho.dim(), &g.tol)?;
    let dist = kd_transform(&rho, &basis_a, &basis_b, g.ordering)?;
    match args.format {
        Format::Json => write_out(out, &kio::to_json_pretty(&KdFile::from_distribution(&dist, &g.tol)?)?)?,
        Format::Csv => kio::write_kd_csv(&dist, out)?,
    }
    Ok(0)
}

fn run_reconstruct(g: &Globals, path: PathBuf, out: &mut impl Write) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(&path).map_err(|e| usage("read_error", format!("{}: {e}", path.display())))?;
    let dist = kio::parse_kd(&text, &g.tol)?;
    let rho = kd_inverse_with(&dist, &g.tol)?;
    write_out(out, &kio::to_json_pretty(&StateFile::mixed(&rho))?)?;
    Ok(0)
}

fn build_rep(g: &Globals, args: &AuditArgs) -> Result<QuasiProbRep, Failure> {
    let spec = args.rep.as_str();
    if spec == "wigner" {
        let dim = args.dim.unwrap_or(5);
        return Ok(wigner_as_rep(dim)?);
    }
    let dim = args.dim.unwrap_or(4);
    let basis_a = kio::resolve_basis(&args.basis_a, dim, &g.tol)?;
    let basis_b = kio::resolve_basis(&args.basis_b, dim, &g.tol)?;
    let parse_param = |prefix: &str| -> Result<f64, Failure> {
        spec[prefix.len()..].parse::<f64>().map_err(|e| usage("bad_rep_spec", format!("'{spec}': {e}")))
    };
    let rep = match spec {
        "kd" => kd_rep(&basis_a, &basis_b, g.ordering)?,
        "kd-ba" => kd_rep(&basis_a, &basis_b, Ordering::BA)?,
        _ if spec.starts_with("mixed:") => mixed_kd_rep(&basis_a, &basis_b, parse_param("mixed:")?)?,
        _ if spec.starts_with("violator:") => make_condition2_violator(&basis_a, &basis_b, parse_param("violator:")?)?,
        _ => {
            return Err(usage("bad_rep_spec", format!("unknown representation '{spec}'; expected kd, kd-ba, mixed:<l>, violator:<e>, wigner")))
        }
    };
    Ok(rep)
}

fn run_audit(g: &Globals, args: AuditArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let rep = build_rep(g, &args)?;
    let none = !(args.c1 || args.c2 || args.c3 || args.span);
    let all = args.all || none;
    let mut reports: Vec<AuditReport> = Vec::new();
    if all || args.c1 {
        reports.push(check_condition1(&rep, g.audit_tol));
    }
    if all || args.c2 {
        reports.push(check_condition2(&rep, g.audit_tol));
    }
    if all || args.c3 {
        reports.push(check_condition3(&rep, args.samples, g.seed, g.audit_tol)?);
    }
    if all || args.span {
        reports.push(check_span(&rep, g.audit_tol));
    }
    for r in &reports {
        write_out(out, &serde_json::to_string(r).map_err(FormatError::from)?)?;
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn parse_couplings(list: &str) -> Result<Vec<f64>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| usage("bad_coupling", format!("'{s}': {e}"))))
        .collect()
}

fn run_weak(g: &Globals, args: WeakArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let psi = match kio::load_state(&args.state, &g.tol)? {
        LoadedState::Pure(psi) => psi,
        LoadedState::Mixed(_) => return Err(usage("mixed_state_unsupported", "weak expects a pure state file")),
    };
    let dim = psi.dim();
    let basis_a = kio::resolve_basis(&args.basis_a, dim, &g.tol)?;
    let basis_b = kio::resolve_basis(&args.basis_b, dim, &g.tol)?;
    if args.a_index >= dim || args.b_index >= dim {
        return Err(usage("bad_index", format!("indices must be below {dim}")));
    }
    let couplings = parse_couplings(&args.couplings)?;
    let cfg = PointerConfig {
        grid_points: args.grid_points,
        grid_extent: args.extent.unwrap_or(20.0 * args.sigma),
        sigma: args.sigma,
        coupling: 0.0,
    };
    let rows = coupling_sweep(&psi, &basis_a.projector(args.a_index), basis_b.vector(args.b_index), &cfg, &couplings)?;
    kio::write_sweep_csv(&rows, out)?;
    Ok(0)
}

fn run_wigner(g: &Globals, args: WignerArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let rho = kio::load_state(&args.state, &g.tol)?.density();
    let table = discrete_wigner(&rho)?;
    let report = if args.report { Some(condition3_violation_report(&rho)?) } else { None };
    match args.format {
        Format::Json => write_out(out, &kio::to_json_pretty(&WignerFile::new(&table, report))?)?,
        Format::Csv => {
            kio::write_wigner_csv(&table, &mut *out)?;
            if let Some(violations) = report {
                write_out(out, "")?;
                let mut csv = csv::Writer::from_writer(&mut *out);
                csv.write_record(["q", "p", "value"]).map_err(FormatError::from)?;
                for v in violations {
                    csv.serialize((v.q, v.p, v.value)).map_err(FormatError::from)?;
                }
                csv.flush().map_err(FormatError::from)?;
            }
        }
    }
    Ok(0)
}
