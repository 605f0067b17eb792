//! `bineg`: binegativity analysis, ensemble verification, qutrit search and plane sections.
//!
//! Exit codes: 0 success, 1 property violation, 2 input or flag error, 3 numerical failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bineg::binegativity::{negative_decomposition_with, summary_with};
use bineg::certificates::{certify_from, CertificateJson};
use bineg::explorer::{cross_section, default_plane, search_binegative_with, verify_ensemble};
use bineg::linalg::Side;
use bineg::normal_form::{filter_normal_form_with, rank3_regularize_with, NormalForm, NormalFormClass};
use bineg::report::{to_json_string, MatrixJson, SCHEMA_VERSION, TOOL_VERSION};
use bineg::states::{EnsembleKind, EnsembleSpec, StateFile};
use bineg::{Density, Error, Tolerances};

#[derive(Parser)]
#[command(name = "bineg", version, about = "Binegativity of bipartite quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one state file.
    Analyze {
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check the two-qubit theorems over a random ensemble.
    Verify(EnsembleArgs),
    /// Count binegative states in a random ensemble.
    Search(EnsembleArgs),
    /// Classify a plane section around P^{T_B} of an entangled two-qubit state.
    Section {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Ensemble {
    Hs,
    Pure,
    RankK,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Local dimensions, e.g. 2x2 or 3x3.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value = "hs")]
    ensemble: Ensemble,
    /// Rank for `--ensemble rank-k`.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Positivity slack (absolute, unit trace).
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad dimension {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad dimension {b:?}"))?;
    if a == 0 || b == 0 || a > 4 || b > 4 {
        return Err(format!("dimensions must lie in 1..=4, got {a}x{b}"));
    }
    Ok((a, b))
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Self { code: 2, kind, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { 3 } else { 2 };
        Self { code, kind: e.kind(), message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn tolerances(tol: Option<f64>) -> Result<Tolerances, Failure> {
    let mut t = Tolerances::default();
    if let Some(v) = tol {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::input("invalid_tolerance", format!("--tol must be positive, got {v}")));
        }
        t.psd = v;
    }
    t.validate().map_err(|m| Failure::input("invalid_tolerance", m))?;
    Ok(t)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input("io", format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::input("io", e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn read_state(path: &Path, tol: &Tolerances) -> Result<Density, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
    Ok(StateFile::parse(&text)?.state(tol)?)
}

fn to_json<S: Serialize>(value: &S) -> String {
    to_json_string(value).expect("reports serialize")
}

#[derive(Serialize)]
struct InputDigest {
    dims: [usize; 2],
    trace: f64,
    min_eigenvalue: f64,
    rescaled: bool,
}

#[derive(Serialize)]
struct SummaryJson {
    negativity: f64,
    log_negativity: f64,
    is_ppt: bool,
    lambda: f64,
    binegativity_min_eig: f64,
}

#[derive(Serialize)]
struct DecompositionJson {
    partial_transpose_spectrum: Vec<f64>,
    positive_spectrum: Vec<f64>,
    positive_rank: usize,
    binegativity_spectrum: Vec<f64>,
    positive_part_tb_min_eig: f64,
}

#[derive(Serialize)]
struct NormalFormJson {
    /// "positive_part" for entangled input, "state" otherwise.
    source: &'static str,
    class: &'static str,
    sigma_c: Option<[f64; 4]>,
    a: MatrixJson,
    b: MatrixJson,
    p: [f64; 4],
    n: f64,
    residual: f64,
    iterations: usize,
    regularized: bool,
}

impl NormalFormJson {
    fn new(nf: &NormalForm<f64>, source: &'static str, regularized: bool) -> Self {
        let (class, sigma_c) = match nf.class {
            NormalFormClass::BellDiagonal => ("bell_diagonal", None),
            NormalFormClass::SigmaC { a, b, c, d } => ("sigma_c", Some([a, b, c, d])),
        };
        Self {
            source,
            class,
            sigma_c,
            a: MatrixJson::from_matrix(&nf.a),
            b: MatrixJson::from_matrix(&nf.b),
            p: nf.p,
            n: nf.n,
            residual: nf.residual,
            iterations: nf.iterations,
            regularized,
        }
    }
}

#[derive(Serialize)]
struct CertificateBlock {
    applicable: bool,
    status: &'static str,
    reason: Option<String>,
    certificate: Option<CertificateJson>,
    failure_margins: Option<Vec<(String, f64)>>,
}

#[derive(Serialize)]
struct AnalysisReport {
    schema: &'static str,
    tool_version: &'static str,
    tolerances: Tolerances,
    input: InputDigest,
    summary: SummaryJson,
    decomposition: Option<DecompositionJson>,
    normal_form: Option<NormalFormJson>,
    certificate: CertificateBlock,
}

fn not_applicable(reason: &str) -> CertificateBlock {
    CertificateBlock {
        applicable: false,
        status: "not_applicable",
        reason: Some(reason.into()),
        certificate: None,
        failure_margins: None,
    }
}

fn cmd_analyze(state: &Path, out: Option<&Path>, tol: Option<f64>) -> CmdResult {
    let tol = tolerances(tol)?;
    let sigma = read_state(state, &tol)?;
    let (da, db) = sigma.dims();
    let s = summary_with(&sigma, &tol)?;
    let input = InputDigest {
        dims: [da, db],
        trace: sigma.op().trace(),
        min_eigenvalue: sigma.op().eig_with(&tol)?.min(),
        rescaled: sigma.was_rescaled(),
    };
    let summary = SummaryJson {
        negativity: s.negativity,
        log_negativity: s.log_negativity,
        is_ppt: s.is_ppt,
        lambda: s.lambda,
        binegativity_min_eig: s.binegativity_min_eig,
    };

    let mut code = 0;
    let (decomposition, normal_form, certificate) = if (da, db) != (2, 2) {
        (None, None, not_applicable("certificates are defined for two qubits"))
    } else {
        let d = negative_decomposition_with(&sigma, &tol)?;
        let bineg = d.binegativity();
        let decomposition = DecompositionJson {
            partial_transpose_spectrum: d.spectrum.clone(),
            positive_spectrum: d.positive_spectrum.clone(),
            positive_rank: d.positive_rank(tol.rank),
            binegativity_spectrum: bineg.eig_with(&tol)?.values,
            positive_part_tb_min_eig: d.positive.partial_transpose(Side::B).eig_with(&tol)?.min(),
        };
        if d.is_entangled(&tol) {
            let psi = d.psi().expect("entangled input has a negative term");
            let regularized = d.positive_rank(tol.rank) < 3;
            let p = if regularized { rank3_regularize_with(&d.positive, psi, &tol)? } else { d.positive.clone() };
            let nf = filter_normal_form_with(&p, &tol)?;
            let nf_json = NormalFormJson::new(&nf, "positive_part", regularized);
            let block = match certify_from(&sigma, &d, &tol) {
                Ok(c) => CertificateBlock {
                    applicable: true,
                    status: "pass",
                    reason: None,
                    certificate: Some(c.to_json()),
                    failure_margins: None,
                },
                Err(Error::CertificateFailure { reason, margins }) => {
                    code = 1;
                    CertificateBlock {
                        applicable: true,
                        status: "fail",
                        reason: Some(reason),
                        certificate: None,
                        failure_margins: Some(margins),
                    }
                }
                Err(e) => return Err(e.into()),
            };
            (Some(decomposition), Some(nf_json), block)
        } else {
            let nf = filter_normal_form_with(sigma.op(), &tol)?;
            (
                Some(decomposition),
                Some(NormalFormJson::new(&nf, "state", false)),
                not_applicable("state is PPT"),
            )
        }
    };

    let report = AnalysisReport {
        schema: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        tolerances: tol,
        input,
        summary,
        decomposition,
        normal_form,
        certificate,
    };
    write_output(out, &to_json(&report))?;
    Ok(code)
}

fn ensemble_spec(args: &EnsembleArgs, default_dims: (usize, usize)) -> Result<EnsembleSpec, Failure> {
    let kind = match (args.ensemble, args.rank) {
        (Ensemble::Hs, None) => EnsembleKind::HilbertSchmidt,
        (Ensemble::Pure, None) => EnsembleKind::HaarPure,
        (Ensemble::RankK, Some(k)) => EnsembleKind::RankK { k },
        (Ensemble::RankK, None) => return Err(Failure::input("invalid_flag", "--ensemble rank-k needs --rank")),
        (_, Some(_)) => return Err(Failure::input("invalid_flag", "--rank only applies to --ensemble rank-k")),
    };
    Ok(EnsembleSpec::new(args.dims.unwrap_or(default_dims), kind, args.seed, args.n)?)
}

fn cmd_verify(args: &EnsembleArgs) -> CmdResult {
    let tol = tolerances(args.tol)?;
    let spec = ensemble_spec(args, (2, 2))?;
    if spec.dims != (2, 2) {
        return Err(Failure::input("invalid_flag", "verify supports --dims 2x2 only"));
    }
    let report = verify_ensemble(&spec, &tol)?;
    write_output(args.out.as_deref(), &to_json(&report))?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_search(args: &EnsembleArgs) -> CmdResult {
    let tol = tolerances(args.tol)?;
    let spec = ensemble_spec(args, (3, 3))?;
    let record = search_binegative_with(&spec, &tol)?;
    write_output(args.out.as_deref(), &to_json(&record))?;
    Ok(0)
}

fn cmd_section(
    state: &Path,
    grid: usize,
    radius: f64,
    out: Option<&Path>,
    svg: Option<&Path>,
    tol: Option<f64>,
) -> CmdResult {
    let tol = tolerances(tol)?;
    if grid == 0 || !(radius.is_finite() && radius > 0.0) {
        return Err(Failure::input("invalid_flag", "--grid must be positive and --radius positive"));
    }
    let sigma = read_state(state, &tol)?;
    let plane = default_plane(&sigma, &tol)?;
    let section = cross_section(&plane.center, &plane.dir1, &plane.dir2, radius, grid, &tol)?;
    write_output(out, &section.to_csv())?;
    if let Some(p) = svg {
        fs::write(p, section.to_svg()).map_err(|e| Failure::input("io", format!("{}: {e}", p.display())))?;
    }
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BINEG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::input("invalid_env", format!("BINEG_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::input("invalid_env", e.to_string()))
}

fn run(cli: Cli) -> CmdResult {
    configure_threads()?;
    match cli.command {
        Command::Analyze { state, out, tol } => cmd_analyze(&state, out.as_deref(), tol),
        Command::Verify(args) => cmd_verify(&args),
        Command::Search(args) => cmd_search(&args),
        Command::Section { state, grid, radius, out, svg, tol } => {
            cmd_section(&state, grid, radius, out.as_deref(), svg.as_deref(), tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            let message = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error kind=invalid_flag exit=2 message={message:?}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error kind={} exit={} message={:?}", f.kind, f.code, f.message);
            ExitCode::from(f.code)
        }
    }
}
