//! Command-line front end for cylhom.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! exit code, the text for stdout and the [`RunReport`]. Exit codes depend
//! only on finding statuses: 0 when every check is ok, 1 for input errors and
//! degenerate configurations, 2 for identity violations. Usage errors exit 64.

mod commands;
mod input;
mod report;

pub use input::validate_files;
pub use report::{Finding, RunReport, Status, Verbosity, VERBOSITY_VAR};

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "cylhom", version, about = "Cylindrical contact homology toolkit")]
struct Cli {
    /// Also write the report as line-delimited JSON; `-` replaces the text
    /// output on stdout.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues and windings of a model asymptotic operator.
    Spectrum(SpectrumArgs),
    /// Fredholm index of a curve between orbits from an orbit file.
    Index(IndexArgs),
    /// Index of a branched cover: k times the base index plus the branching.
    CoverIndex(CoverIndexArgs),
    /// Automatic transversality criterion and winding bounds.
    Transversality(TransversalityArgs),
    /// Homology of one stage of a dataset.
    Homology(StageArgs),
    /// Checks that the differential squares to zero and has integer entries.
    DSquared(DSquaredArgs),
    /// Checks that cobordism counts give a chain map.
    ChainmapCheck(ChainmapArgs),
    /// Checks that two chain maps are homotopic through the K curves.
    HomotopyCheck(StageArgs),
    /// Finite-horizon direct limit of the stage homologies.
    DirectLimit(DirectLimitArgs),
    /// Pole preimages, scan counts and the s0 zero locus of an evaluation map.
    Ev(EvArgs),
    /// Neck analysis.
    Glue {
        #[command(subcommand)]
        command: GlueCommand,
    },
    /// Orientation signs.
    Sign {
        #[command(subcommand)]
        command: SignCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Elliptic,
    #[value(name = "pos_hyp")]
    PosHyp,
    #[value(name = "neg_hyp")]
    NegHyp,
}

impl KindArg {
    fn with(self, eps: f64) -> cylhom::spectral::OperatorKind {
        use cylhom::spectral::OperatorKind::*;
        match self {
            KindArg::Elliptic => Elliptic(eps),
            KindArg::PosHyp => PosHyperbolic(eps),
            KindArg::NegHyp => NegHyperbolic(eps),
        }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long = "type", value_enum)]
    kind: KindArg,
    #[arg(long)]
    eps: f64,
    /// Largest |index| listed.
    #[arg(long, default_value_t = 8)]
    max: usize,
    /// Compare against the finite-difference solver.
    #[arg(long)]
    numeric: bool,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, default_value_t = 5e-3)]
    tol: f64,
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[arg(long)]
    orbits: PathBuf,
    /// Comma-separated orbit ids at the positive punctures.
    #[arg(long, default_value = "")]
    plus: String,
    #[arg(long, default_value = "")]
    minus: String,
    #[arg(long, default_value_t = 0)]
    genus: u32,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    c1: i64,
    /// Report a violation unless the index equals this value.
    #[arg(long, allow_negative_numbers = true)]
    expect: Option<i64>,
}

#[derive(Args, Debug)]
struct CoverIndexArgs {
    #[arg(long, allow_negative_numbers = true)]
    base: i64,
    #[arg(long)]
    degree: u32,
    #[arg(long, default_value_t = 0)]
    branch: u32,
    /// Euler characteristic of the punctured base; with --cover-chi checks
    /// Riemann-Hurwitz.
    #[arg(long, allow_negative_numbers = true, requires = "cover_chi")]
    base_chi: Option<i64>,
    #[arg(long, allow_negative_numbers = true, requires = "base_chi")]
    cover_chi: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    expect: Option<i64>,
}

#[derive(Args, Debug)]
struct TransversalityArgs {
    #[arg(long, allow_negative_numbers = true)]
    ind: i64,
    #[arg(long, default_value_t = 0)]
    genus: u32,
    /// Number of punctures at orbits with even Conley-Zehnder index.
    #[arg(long, default_value_t = 0)]
    gamma0: u32,
    /// Also check winding bounds of this operator against --cz.
    #[arg(long = "type", value_enum, requires_all = ["eps", "cz"])]
    kind: Option<KindArg>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cz: Option<i64>,
    #[arg(long, default_value_t = 8)]
    max: usize,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    #[arg(long)]
    orbits: PathBuf,
    #[arg(long)]
    curves: PathBuf,
    /// Keep only orbits with action strictly below this rational.
    #[arg(long)]
    cap: Option<String>,
}

#[derive(Args, Debug)]
struct StageArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value_t = 0)]
    stage: u32,
}

#[derive(Args, Debug)]
struct DSquaredArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Check one stage only; default is every stage.
    #[arg(long)]
    stage: Option<u32>,
}

#[derive(Args, Debug)]
struct ChainmapArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value_t = 0)]
    stage: u32,
    #[arg(long, default_value_t = 0)]
    map: u32,
}

#[derive(Args, Debug)]
struct DirectLimitArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Number of stages used; default is all.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PoleChoiceArg {
    Last,
    First,
    Both,
}

#[derive(Args, Debug)]
struct EvArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pole_choice: PoleChoiceArg,
    /// Grid points (circle) or cells per side (torus) of the brute-force
    /// scan; 0 skips it. Default 10000 on the circle and 100 on the torus.
    #[arg(long)]
    scan: Option<usize>,
    /// Neck lengths T for the zero-locus check; empty skips it.
    #[arg(long, default_value = "1,2,3,4,5,6,7,8,9,10")]
    t_grid: String,
    /// List the preimage arcs of the meridian.
    #[arg(long)]
    paths: bool,
}

#[derive(Args, Debug)]
struct NeckArgs {
    /// Neck parameter file; default h 0.5, r 4, T0 21, T 60, eps 0.2.
    #[arg(long)]
    neck: Option<PathBuf>,
    /// Override T.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum GlueCommand {
    /// Solves the neck equations and checks that positive modes of psi_+ are
    /// constant and negative modes end at -d_i.
    MomoCheck {
        #[command(flatten)]
        neck: NeckArgs,
        #[arg(long, default_value = "1:1,3:0.5", allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value = "-1:1,-2:-0.6,-4:0.3", allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Pairs sigma_1..sigma_k with the ramped holomorphic end and compares
    /// with c_i e^{-2 lambda_i T}.
    Pairing {
        #[command(flatten)]
        neck: NeckArgs,
        #[arg(long, default_value = "1:1,2:0.5,3:-0.25", allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Sweeps r ||psi_+||* / (e^{-lambda T} + ||psi_-||*) over T and r.
    Sweep {
        #[command(flatten)]
        neck: NeckArgs,
        #[arg(long, default_value = "90,100,120")]
        t_grid: String,
        #[arg(long, default_value = "4,8")]
        r_grid: String,
        #[arg(long, default_value = "1")]
        amplitudes: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Two-sided pairing: closed form against quadrature on both necks.
    CaseB {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 45.0)]
        t_minus: f64,
        #[arg(long, default_value_t = 45.0)]
        t_plus: f64,
        /// eps of the negative hyperbolic orbit at the positive end.
        #[arg(long, default_value_t = 0.2)]
        eps_plus: f64,
        /// eps of the positive hyperbolic orbit at the negative end.
        #[arg(long, default_value_t = 0.3)]
        eps_minus: f64,
        /// Upper-triangular c_{i,j} rows; default identity plus 0.5 above.
        #[arg(long, allow_hyphen_values = true)]
        c_matrix: Option<String>,
        /// Lower-triangular d_{i,j} rows; default identity minus 0.25 below.
        #[arg(long, allow_hyphen_values = true)]
        d_matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c_end: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        d_end: Option<String>,
        #[arg(long)]
        neck: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PoleArg {
    North,
    South,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Away,
    Toward,
}

#[derive(Subcommand, Debug)]
enum SignCommand {
    /// Sign of the comparison isomorphism for a finite-dimensional model.
    Comparison {
        /// Matrix rows.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        /// Spanning vectors of E; with Im + E the whole target.
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        ker: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        coker: String,
        /// Oriented basis of the preimage of E; default from elimination.
        #[arg(long, allow_hyphen_values = true)]
        reference: Option<String>,
    },
    /// Sign of ds0 at a pole.
    Ds0 {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        pole: PoleArg,
        /// (k-1)x(k-1) Jacobian rows.
        #[arg(long, allow_hyphen_values = true)]
        jacobian: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Sign of a glued curve from the signs of its pieces.
    Glued {
        #[arg(long, allow_hyphen_values = true)]
        s1: i8,
        #[arg(long, allow_hyphen_values = true)]
        s2: i8,
        #[arg(long, value_enum)]
        direction: DirectionArg,
    },
    /// Checks that the two ends of an arc of glued curves carry opposite signs.
    Arc {
        /// Signs of the pieces at the end glued away from the arc.
        #[arg(long, allow_hyphen_values = true)]
        ends: String,
        /// Signs of the pieces at the end glued toward it.
        #[arg(long, allow_hyphen_values = true)]
        flat: String,
    },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Spectrum(_) => "spectrum".into(),
            Command::Index(_) => "index".into(),
            Command::CoverIndex(_) => "cover-index".into(),
            Command::Transversality(_) => "transversality".into(),
            Command::Homology(_) => "homology".into(),
            Command::DSquared(_) => "d-squared".into(),
            Command::ChainmapCheck(_) => "chainmap-check".into(),
            Command::HomotopyCheck(_) => "homotopy-check".into(),
            Command::DirectLimit(_) => "direct-limit".into(),
            Command::Ev(_) => "ev".into(),
            Command::Glue { command } => format!(
                "glue {}",
                match command {
                    GlueCommand::MomoCheck { .. } => "momo-check",
                    GlueCommand::Pairing { .. } => "pairing",
                    GlueCommand::Sweep { .. } => "sweep",
                    GlueCommand::CaseB { .. } => "case-b",
                }
            ),
            Command::Sign { command } => format!(
                "sign {}",
                match command {
                    SignCommand::Comparison { .. } => "comparison",
                    SignCommand::Ds0 { .. } => "ds0",
                    SignCommand::Glued { .. } => "glued",
                    SignCommand::Arc { .. } => "arc",
                }
            ),
        }
    }
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    /// None for usage errors and help output.
    pub report: Option<RunReport>,
}

/// Runs one subcommand. `args` excludes the program name.
pub fn run<S: AsRef<str>>(args: &[S]) -> Outcome {
    let args: Vec<String> = args.iter().map(|a| a.as_ref().to_string()).collect();
    let cli = match Cli::try_parse_from(std::iter::once("cylhom".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new(), report: None }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text, report: None },
            };
        }
    };
    let verbosity = match Verbosity::from_env() {
        Ok(v) => v,
        Err(msg) => return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg + "\n", report: None },
    };
    let start = Instant::now();
    let mut ctx = commands::Ctx::default();
    if let Err(fail) = commands::dispatch(&mut ctx, &cli.command) {
        ctx.findings.push(Finding { check: fail.check, status: fail.status, detail: fail.detail });
    }
    let report = RunReport {
        command: cli.command.name(),
        inputs_digest: ctx.inputs.digest(&without_report_flag(&args)),
        convention: ctx.convention.take(),
        values: std::mem::take(&mut ctx.values),
        findings: std::mem::take(&mut ctx.findings),
        timing_ms: start.elapsed().as_millis(),
    };
    let mut stdout = report.to_text(&ctx.body, verbosity);
    let mut stderr = String::new();
    match cli.report.as_deref() {
        Some(p) if p.as_os_str() == "-" => stdout = report.to_jsonl(),
        Some(p) => {
            if let Err(e) = std::fs::write(p, report.to_jsonl()) {
                stderr = format!("cannot write report {}: {e}\n", p.display());
                return Outcome { code: EXIT_INPUT, stdout, stderr, report: Some(report) };
            }
        }
        None => {}
    }
    Outcome { code: report.exit_code(), stdout, stderr, report: Some(report) }
}

fn without_report_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--report" {
            skip = true;
        } else if !a.starts_with("--report=") {
            out.push(a.clone());
        }
    }
    out
}
