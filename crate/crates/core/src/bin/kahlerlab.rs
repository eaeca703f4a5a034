use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use kahlerlab::config::{matrix_from_spec, MatrixSpec, RunConfigFile};
use kahlerlab::dhym::{complex_slope, dhym_p, dhym_q, gamma_theta_membership, lagrangian_phase, truncated_phase, DhymPhaseSpec};
use kahlerlab::flows::{self, RunStatus, RunSummary};
use kahlerlab::gma::{c_subsolution_margin, gamma_bar_membership, gma_p, gma_q, tp_positive, GmaCoefficients, EIG_TOL};
use kahlerlab::io::write_atomic;
use kahlerlab::props::{run_suite, PropOptions, Suite};
use kahlerlab::spectra::{relative_eigenvalues, symmetric_functions, HermitianMatrix, Spectrum};
use kahlerlab::torus::{intersection_numbers, write_scalar_snapshot};
use kahlerlab::Error;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_T_MAX: u8 = 3;
const EXIT_DIVERGED: u8 = 4;
const EXIT_SCHEDULE: u8 = 5;

/// Operators, cones, energies and flows for the generalized Monge-Ampère and
/// supercritical dHYM equations on flat complex tori.
///
/// Exit codes: 0 ok, 1 property violation, 2 bad input, 3 t_max reached,
/// 4 diverged, 5 positivity margins fail.
#[derive(Parser)]
#[command(name = "kahlerlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate symmetric functions, operators, phases and cone memberships.
    Op(OpArgs),
    /// Decide cone membership; exits 1 with a witness outside the cone.
    Cone(ConeArgs),
    /// Run a gMA or dHYM flow from a JSON config.
    Flow(ConfigArgs),
    /// Run a boundary sweep from a JSON config with a schedule section.
    Sweep(ConfigArgs),
    /// Run a seeded property suite; exits 1 with the first witness on failure.
    Props(PropsArgs),
    /// Intersection margins and the forced c0 for constant classes.
    Intersect(IntersectArgs),
}

#[derive(Args)]
struct Spectral {
    /// Eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "chi")]
    lambda: Option<Vec<f64>>,
    /// Background form as a JSON matrix; entries are numbers or [re, im].
    #[arg(long, alias = "alpha")]
    chi: Option<String>,
    /// Reference Kähler form as a JSON matrix (identity by default).
    #[arg(long, requires = "chi")]
    omega: Option<String>,
}

#[derive(Args)]
struct OpArgs {
    #[command(flatten)]
    spectral: Spectral,
    /// gMA operators only.
    #[arg(long, conflicts_with_all = ["dhym", "sym"])]
    gma: bool,
    /// dHYM quantities only.
    #[arg(long, conflicts_with = "sym")]
    dhym: bool,
    /// Symmetric functions only.
    #[arg(long)]
    sym: bool,
    /// c_1..c_{n-1}, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    /// Phases for the Γ_{θ,Θ} membership report.
    #[arg(long, requires = "big_theta")]
    theta: Option<f64>,
    #[arg(long, requires = "theta")]
    big_theta: Option<f64>,
}

#[derive(Args)]
struct ConeArgs {
    #[command(flatten)]
    spectral: Spectral,
    #[arg(long, conflicts_with = "dhym", required_unless_present = "dhym")]
    gma: bool,
    #[arg(long)]
    dhym: bool,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_if_eq("gma", "true"))]
    c: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c0: f64,
    #[arg(long, default_value_t = 0.0)]
    c0_floor: f64,
    #[arg(long, required_if_eq("dhym", "true"))]
    theta: Option<f64>,
    #[arg(long, required_if_eq("dhym", "true"))]
    big_theta: Option<f64>,
    /// Test the open cone instead of its closure.
    #[arg(long)]
    open: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// RunConfigFile JSON.
    config: PathBuf,
}

#[derive(Args)]
struct PropsArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// Replace c_1..c_{n-1} in the gMA suites without validation.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<f64>>,
}

#[derive(Args)]
struct IntersectArgs {
    #[arg(long)]
    chi: String,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Vec<f64>,
    /// Use the Leibniz expansion directly even when χ and ω commute.
    #[arg(long)]
    no_pencil: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Schedule { .. } => EXIT_SCHEDULE,
            _ => EXIT_BAD_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn parse_matrix(text: &str, n: Option<usize>, name: &str) -> Result<HermitianMatrix, Failure> {
    let spec: MatrixSpec = serde_json::from_str(text).map_err(|e| bad_input(format!("{name}: {e}")))?;
    let n = n.unwrap_or(spec.len());
    if n == 0 {
        return Err(bad_input(format!("{name} is empty")));
    }
    Ok(matrix_from_spec(&spec, n, name)?)
}

fn pair(chi: &str, omega: Option<&str>) -> Result<(HermitianMatrix, HermitianMatrix), Failure> {
    let chi = parse_matrix(chi, None, "chi")?;
    let omega = match omega {
        Some(o) => parse_matrix(o, Some(chi.dim()), "omega")?,
        None => HermitianMatrix::identity(chi.dim()),
    };
    Ok((chi, omega))
}

fn spectrum(s: &Spectral) -> Result<Spectrum, Failure> {
    match (&s.lambda, &s.chi) {
        (Some(l), _) if l.is_empty() => Err(bad_input("--lambda is empty")),
        (Some(l), _) => Ok(Spectrum::new(l.clone())?),
        (None, Some(chi)) => {
            let (chi, omega) = pair(chi, s.omega.as_deref())?;
            Ok(relative_eigenvalues(&chi, &omega)?)
        }
        (None, None) => Err(bad_input("supply --lambda or --chi")),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| bad_input(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn value_or_null(r: kahlerlab::Result<f64>) -> Value {
    r.map(Value::from).unwrap_or(Value::Null)
}

fn cmd_op(args: &OpArgs) -> CmdResult {
    let lambda = spectrum(&args.spectral)?;
    let n = lambda.dim();
    let all = !(args.gma || args.dhym || args.sym);
    let mut out = Map::new();
    if !args.sym {
        out.insert("lambda".into(), json!(lambda.values()));
    }
    if all || args.sym || args.gma {
        out.insert("S".into(), json!(symmetric_functions(lambda.values())));
    }
    if all || args.gma {
        let c = args.c.clone().unwrap_or_default();
        if args.gma && c.len() + 1 != n {
            return Err(bad_input(format!("--c needs {} values for n = {n}", n - 1)));
        }
        if c.len() + 1 == n {
            let c0 = args.c0.unwrap_or(0.0);
            let coeffs = GmaCoefficients::new(n, c, kahlerlab::gma::C0::Constant(c0), c0.min(0.0))?;
            for ell in 1..n {
                out.insert(format!("P{ell}"), value_or_null(gma_p(&lambda, &coeffs, ell)));
            }
            out.insert("Q".into(), value_or_null(gma_q(&lambda, &coeffs, c0)));
            out.insert(
                "gamma_nonneg".into(),
                json!(lambda.values().iter().all(|v| *v >= -EIG_TOL)),
            );
            out.insert("gamma_bar".into(), json!(gamma_bar_membership(&lambda, &coeffs)));
            out.insert("c_subsolution_margin".into(), value_or_null(c_subsolution_margin(&lambda, &coeffs)));
            let tp: Vec<Value> = (1..=n).map(|p| tp_positive(&lambda, &coeffs, p).map(Value::from).unwrap_or(Value::Null)).collect();
            out.insert("tp_positive".into(), Value::Array(tp));
        }
    }
    if all || args.dhym {
        let slope = complex_slope(&lambda);
        out.insert("theta".into(), json!(lagrangian_phase(&lambda)));
        let tt: Vec<Value> = (1..n).map(|ell| value_or_null(truncated_phase(&lambda, ell))).collect();
        out.insert("theta_tilde".into(), Value::Array(tt));
        out.insert("slope".into(), json!([slope.re, slope.im]));
        for ell in 1..n {
            out.insert(format!("dhym_P{ell}"), value_or_null(dhym_p(&lambda, ell)));
        }
        out.insert("dhym_Q".into(), value_or_null(dhym_q(&lambda, args.c0.unwrap_or(0.0))));
        if let (Some(theta), Some(big)) = (args.theta, args.big_theta) {
            let spec = DhymPhaseSpec::new(theta, big, 0.0)?;
            out.insert("gamma_theta".into(), json!(gamma_theta_membership(&lambda, &spec, true)));
        }
    }
    print_json(&out)?;
    Ok(EXIT_OK)
}

fn cmd_cone(args: &ConeArgs) -> CmdResult {
    let lambda = spectrum(&args.spectral)?;
    let n = lambda.dim();
    let report = if args.dhym {
        let spec = DhymPhaseSpec::new(args.theta.unwrap_or_default(), args.big_theta.unwrap_or_default(), args.c0_floor)?;
        gamma_theta_membership(&lambda, &spec, !args.open)
    } else {
        let c = args.c.clone().unwrap_or_default();
        if c.len() + 1 != n {
            return Err(bad_input(format!("--c needs {} values for n = {n}", n - 1)));
        }
        let coeffs = GmaCoefficients::new(n, c, kahlerlab::gma::C0::Constant(args.c0), args.c0_floor)?;
        let mut r = gamma_bar_membership(&lambda, &coeffs);
        if args.open && r.is_member && r.margin <= 0.0 {
            r.is_member = false;
        }
        r
    };
    print_json(&json!({ "lambda": lambda.values(), "report": report }))?;
    Ok(if report.is_member { EXIT_OK } else { EXIT_VIOLATION })
}

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::TMaxReached => EXIT_T_MAX,
        RunStatus::Diverged => EXIT_DIVERGED,
    }
}

#[derive(Serialize)]
struct FlowSummaryFile<'a> {
    #[serde(flatten)]
    summary: RunSummary,
    seed: u64,
    config: &'a RunConfigFile,
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn json_text<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| bad_input(e.to_string()))
}

fn cmd_flow(args: &ConfigArgs) -> CmdResult {
    let file = RunConfigFile::load(&args.config)?;
    if file.schedule.is_some() {
        return Err(bad_input("config has a schedule section; use the sweep command"));
    }
    let record = flows::run(file.flow_config()?)?;
    let summary = FlowSummaryFile {
        summary: record.summary(),
        seed: file.seed,
        config: &file,
    };
    let text = json_text(&summary)?;
    if let Some(p) = &file.outputs.csv {
        write_text(&file.resolve(p), &record.to_csv())?;
    }
    if let Some(p) = &file.outputs.summary {
        write_text(&file.resolve(p), &text)?;
    }
    if let Some(p) = &file.outputs.snapshot {
        write_scalar_snapshot(&file.resolve(p), &record.final_phi)?;
    }
    print!("{text}");
    Ok(status_code(record.status))
}

#[derive(Serialize)]
struct SweepSummaryFile<'a> {
    entries: &'a [flows::SweepEntry],
    distances: &'a [f64],
    distances_decreasing: bool,
    runs: Vec<RunSummary>,
    seed: u64,
    config: &'a RunConfigFile,
}

fn cmd_sweep(args: &ConfigArgs) -> CmdResult {
    let file = RunConfigFile::load(&args.config)?;
    let report = flows::boundary_sweep(&file.sweep_config()?)?;
    let summary = SweepSummaryFile {
        entries: &report.entries,
        distances: &report.distances,
        distances_decreasing: report.distances_decreasing(),
        runs: report.records.iter().map(|r| r.summary()).collect(),
        seed: file.seed,
        config: &file,
    };
    let text = json_text(&summary)?;
    if let Some(dir) = &file.outputs.dir {
        let dir = file.resolve(dir);
        for (entry, (record, limit)) in report.entries.iter().zip(report.records.iter().zip(&report.limits)) {
            write_text(&dir.join(format!("index_{}.csv", entry.index)), &record.to_csv())?;
            write_scalar_snapshot(&dir.join(format!("limit_{}.kfld", entry.index)), limit)?;
        }
        write_text(&dir.join("sweep.json"), &text)?;
    }
    if let Some(p) = &file.outputs.summary {
        write_text(&file.resolve(p), &text)?;
    }
    print!("{text}");
    let code = report
        .records
        .iter()
        .map(|r| status_code(r.status))
        .max()
        .unwrap_or(EXIT_OK);
    Ok(code)
}

fn cmd_props(args: &PropsArgs) -> CmdResult {
    let suite: Suite = args.suite.parse()?;
    let opts = PropOptions {
        seed: args.seed,
        samples: args.samples,
        coefficients: args.c.clone(),
    };
    let report = run_suite(suite, &opts)?;
    print_json(&report)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_intersect(args: &IntersectArgs) -> CmdResult {
    let (chi, omega) = pair(&args.chi, args.omega.as_deref())?;
    if args.c.len() + 1 != chi.dim() {
        return Err(bad_input(format!("--c needs {} values for n = {}", chi.dim() - 1, chi.dim())));
    }
    let report = intersection_numbers(&chi, &omega, &args.c, !args.no_pencil)?;
    let positive = report.all_positive();
    print_json(&json!({
        "forced_c0": report.forced_c0,
        "mixed": report.mixed,
        "reduced_by_pencil": report.reduced_by_pencil,
        "margins": report.margins,
        "all_positive": positive,
    }))?;
    Ok(if positive { EXIT_OK } else { EXIT_SCHEDULE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Op(a) => cmd_op(a),
        Command::Cone(a) => cmd_cone(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Props(a) => cmd_props(a),
        Command::Intersect(a) => cmd_intersect(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
