//! Command-line front end.
//!
//! Reports go to stdout (or `--out`) as JSON, or CSV where a command has a
//! tabular form. Exit codes: 0 success, 1 invalid arguments or unreadable
//! input, 2 numerical failure. Failures print `{"error": kind, "message": ...}`
//! to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::billiard::{lambda_min_profile, random_pair, verify_billiard_theorem, ScanOptions};
use crate::bures::{bures_angle, fidelity, geodesic};
use crate::classical::{
    fr_geodesic_distance, jeffreys_density, monotonicity_stress, multinomial_ellipse_experiment, ProbabilityVector,
};
use crate::error::Error;
use crate::io::{matrix_to_json, parse_complex_matrix, parse_real_vector, read_json, to_json_string, vector_to_json};
use crate::linalg::{eig, CMatrix, HermitianMatrix};
use crate::means::{operator_mean, MonotoneFunction};
use crate::measurement::{optimal_measurement_full, povm_classical_angle, qubit_povm_search};
use crate::metrics::monotone_ds2;
use crate::state::{DensityMatrix, TangentPerturbation};
use crate::verify::{run_criterion, CRITERIA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Arithmetic,
    Geometric,
    Harmonic,
}

impl FunctionArg {
    fn function(self) -> MonotoneFunction {
        match self {
            FunctionArg::Arithmetic => MonotoneFunction::arithmetic(),
            FunctionArg::Geometric => MonotoneFunction::geometric(),
            FunctionArg::Harmonic => MonotoneFunction::harmonic(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qinfogeom", version, about = "Information geometry experiments on classical and quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for all randomness
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Bounce acceptance threshold on λ_min (billiard)
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Polar resolution of the axis grid (povm-search)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Operator monotone function of the metric or mean
    #[arg(long = "f", global = true, value_enum, default_value_t = FunctionArg::Arithmetic)]
    pub f: FunctionArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher–Rao geodesic distance between two probability vectors
    ClassicalDistance { p: PathBuf, q: PathBuf },
    /// Jeffreys prior density at a probability vector
    Jeffreys { p: PathBuf },
    /// Empirical vs predicted multinomial frequency covariance
    MultinomialExperiment { p: PathBuf },
    /// Monotonicity of the Fisher–Rao distance under random stochastic maps
    MonotoneStress,
    /// Operator mean of two positive definite matrices
    Mean { a: PathBuf, b: PathBuf },
    /// Squared line element of a monotone metric
    MonotoneMetric { rho: PathBuf, drho: PathBuf },
    Fidelity { a: PathBuf, b: PathBuf },
    /// Bures angle arccos √F
    BuresDistance { a: PathBuf, b: PathBuf },
    /// Samples of the Bures geodesic from a to b
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        /// Sample the whole great circle t ∈ [0, π) instead of [0, t*]
        #[arg(long)]
        full: bool,
    },
    /// Eigenbasis measurement of the transition operator M
    OptimalMeasurement { a: PathBuf, b: PathBuf },
    /// Grid search over projective qubit measurements
    PovmSearch { a: PathBuf, b: PathBuf },
    /// Boundary points of the extended geodesic and their match with M's eigenbasis
    Billiard { a: Option<PathBuf>, b: Option<PathBuf> },
    /// Run the acceptance suite
    VerifyAll {
        /// Run only these criteria
        #[arg(long)]
        only: Vec<u8>,
        /// Include wall-clock times (makes output run-dependent)
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unreadable input: exit 1.
    Validation { kind: &'static str, message: String },
    /// A library error: exit 2.
    Numerical(Error),
    /// The acceptance suite ran but some criterion failed: exit 2, report on stdout.
    Acceptance(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure::Validation { kind: "ValidationError", message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation { .. } => 1,
            Failure::Numerical(_) | Failure::Acceptance(_) => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Failure::Validation { kind, message } => json!({ "error": kind, "message": message }),
            Failure::Numerical(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            Failure::Acceptance(_) => json!({ "error": "AcceptanceFailure", "message": "some criteria failed" }),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_failure(e: Error) -> Failure {
    Failure::Validation { kind: "ParseError", message: e.to_string() }
}

fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    let v = read_json(path).map_err(parse_failure)?;
    parse_real_vector(&v, &path.display().to_string()).map_err(parse_failure)
}

fn load_probability(path: &Path) -> CliResult<ProbabilityVector> {
    Ok(ProbabilityVector::new(load_vector(path)?)?)
}

fn load_matrix(path: &Path) -> CliResult<CMatrix> {
    let v = read_json(path).map_err(parse_failure)?;
    parse_complex_matrix(&v, &path.display().to_string()).map_err(parse_failure)
}

fn load_state(path: &Path) -> CliResult<DensityMatrix> {
    Ok(DensityMatrix::from_matrix(load_matrix(path)?)?)
}

/// A finished report: JSON value or CSV text.
pub enum Report {
    Json(Value),
    Csv(String),
}

impl Report {
    pub fn render(&self) -> String {
        match self {
            Report::Json(v) => to_json_string(v),
            Report::Csv(s) => s.clone(),
        }
    }
}

fn positive(name: &str, v: Option<usize>, default: usize) -> CliResult<usize> {
    match v {
        Some(0) => Err(Failure::validation(format!("--{name} must be at least 1"))),
        Some(x) => Ok(x),
        None => Ok(default),
    }
}

fn json_only(cli: &Cli, cmd: &str) -> CliResult<()> {
    if cli.format == Format::Csv {
        return Err(Failure::validation(format!("{cmd} has no CSV form")));
    }
    Ok(())
}

fn eigen_json(es: &crate::linalg::EigenSystem) -> (Value, Value) {
    let vecs: Vec<Value> = (0..es.dim()).map(|k| vector_to_json(&es.eigenvector(k))).collect();
    (json!(es.eigenvalues), Value::Array(vecs))
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> CliResult<Report> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::validation("--tol must be positive"));
    }
    if let Some(0) = cli.trials {
        return Err(Failure::validation("--trials must be at least 1"));
    }
    let report = match &cli.command {
        Command::ClassicalDistance { p, q } => {
            json_only(cli, "classical-distance")?;
            let d = fr_geodesic_distance(&load_probability(p)?, &load_probability(q)?)?;
            json!({ "distance": d })
        }
        Command::Jeffreys { p } => {
            json_only(cli, "jeffreys")?;
            json!({ "density": jeffreys_density(&load_probability(p)?)? })
        }
        Command::MultinomialExperiment { p } => {
            json_only(cli, "multinomial-experiment")?;
            let trials = positive("trials", cli.trials, 1000)?;
            let samples = cli.samples.unwrap_or(100_000);
            let r = multinomial_ellipse_experiment(&load_probability(p)?, samples, trials, cli.seed)?;
            let mut v = serde_json::to_value(r).expect("report serializes");
            v["seed"] = json!(cli.seed);
            v
        }
        Command::MonotoneStress => {
            json_only(cli, "monotone-stress")?;
            let trials = positive("trials", cli.trials, 10_000)?;
            let r = monotonicity_stress(cli.seed, trials);
            json!({ "seed": cli.seed, "trials": r.trials, "violations": r.violations, "max_excess": r.max_excess })
        }
        Command::Mean { a, b } => {
            json_only(cli, "mean")?;
            let f = cli.f.function();
            let a = HermitianMatrix::new(load_matrix(a)?)?;
            let b = HermitianMatrix::new(load_matrix(b)?)?;
            let m = operator_mean(&a, &b, &f)?;
            json!({ "f": f.kind().to_string(), "mean": matrix_to_json(m.as_matrix()) })
        }
        Command::MonotoneMetric { rho, drho } => {
            json_only(cli, "monotone-metric")?;
            let f = cli.f.function();
            let rho = load_state(rho)?;
            let d = TangentPerturbation::from_matrix(load_matrix(drho)?)?;
            json!({ "f": f.kind().to_string(), "ds2": monotone_ds2(&rho, &d, &f)? })
        }
        Command::Fidelity { a, b } => {
            json_only(cli, "fidelity")?;
            json!({ "fidelity": fidelity(&load_state(a)?, &load_state(b)?)? })
        }
        Command::BuresDistance { a, b } => {
            json_only(cli, "bures-distance")?;
            let (a, b) = (load_state(a)?, load_state(b)?);
            json!({ "bures_angle": bures_angle(&a, &b)?, "fidelity": fidelity(&a, &b)? })
        }
        Command::Geodesic { a, b, full } => return geodesic_report(cli, a, b, *full),
        Command::OptimalMeasurement { a, b } => {
            json_only(cli, "optimal-measurement")?;
            let (a, b) = (load_state(a)?, load_state(b)?);
            let om = optimal_measurement_full(&a, &b)?;
            let (vals, vecs) = eigen_json(&om.eigen);
            json!({
                "bures_angle": bures_angle(&a, &b)?,
                "attained_angle": povm_classical_angle(&om.povm, &a, &b)?,
                "m": matrix_to_json(om.m.as_matrix()),
                "m_eigenvalues": vals,
                "m_eigenvectors": vecs,
                "projectors": om.povm.elements().iter().map(|e| matrix_to_json(e.as_matrix())).collect::<Vec<_>>(),
            })
        }
        Command::PovmSearch { a, b } => {
            json_only(cli, "povm-search")?;
            let grid = positive("grid", cli.grid, 200)?;
            let (a, b) = (load_state(a)?, load_state(b)?);
            let r = qubit_povm_search(&a, &b, grid, 60)?;
            let (vals, vecs) = eigen_json(&optimal_measurement_full(&a, &b)?.eigen);
            json!({
                "bures_angle": r.bures_angle,
                "best_angle": r.best_angle,
                "best_axis": r.best_axis,
                "non_unique": r.non_unique,
                "evaluations": r.evaluations,
                "m_eigenvalues": vals,
                "m_eigenvectors": vecs,
            })
        }
        Command::Billiard { a, b } => return billiard_report(cli, a.as_deref(), b.as_deref()),
        Command::VerifyAll { only, timings } => {
            json_only(cli, "verify-all")?;
            let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.clone() };
            let mut results = Vec::new();
            for id in ids {
                let r = run_criterion(id, cli.seed)
                    .ok_or_else(|| Failure::validation(format!("unknown criterion {id}")))?;
                eprintln!("{}", r.summary_line());
                let mut v = serde_json::to_value(&r).expect("result serializes");
                if !timings {
                    v.as_object_mut().expect("object").remove("elapsed_s");
                }
                results.push((r.passed, v));
            }
            let passed = results.iter().all(|r| r.0);
            let v = json!({ "seed": cli.seed, "passed": passed, "criteria": results.into_iter().map(|r| r.1).collect::<Vec<_>>() });
            if !passed {
                return Err(Failure::Acceptance(v));
            }
            v
        }
    };
    Ok(Report::Json(report))
}

/// Shortest round-trip form with exponent notation where it is shorter.
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("floats serialize")
}

fn vectorized_header(n: usize) -> String {
    let mut h = String::from("t");
    for i in 0..n {
        for j in 0..n {
            write!(h, ",rho_{i}_{j}_re,rho_{i}_{j}_im").unwrap();
        }
    }
    h.push_str(",lambda_min");
    h
}

fn geodesic_report(cli: &Cli, a: &Path, b: &Path, full: bool) -> CliResult<Report> {
    let samples = cli.samples.unwrap_or(101) as usize;
    if samples < 2 {
        return Err(Failure::validation("--samples must be at least 2"));
    }
    let path = geodesic(&load_state(a)?, &load_state(b)?)?;
    let n = path.dim();
    let t_end = if full { std::f64::consts::PI } else { path.t_star() };
    let denom = if full { samples } else { samples - 1 } as f64;
    let rows: Vec<(f64, HermitianMatrix, f64)> = crate::par::map_indices(samples, |k| {
        let t = t_end * k as f64 / denom;
        let rho = path.rho_at(t);
        let lam = eig(&rho).eigenvalues[0];
        (t, rho, lam)
    });
    match cli.format {
        Format::Csv => {
            let mut s = vectorized_header(n);
            s.push('\n');
            for (t, rho, lam) in &rows {
                s.push_str(&num(*t));
                for i in 0..n {
                    for j in 0..n {
                        let z = rho.as_matrix()[(i, j)];
                        write!(s, ",{},{}", num(z.re), num(z.im)).unwrap();
                    }
                }
                writeln!(s, ",{}", num(*lam)).unwrap();
            }
            Ok(Report::Csv(s))
        }
        Format::Json => Ok(Report::Json(json!({
            "dim": n,
            "t_star": path.t_star(),
            "samples": rows.iter().map(|(t, rho, lam)| json!({
                "t": t, "rho": matrix_to_json(rho.as_matrix()), "min_eigenvalue": lam
            })).collect::<Vec<_>>(),
        }))),
    }
}

fn billiard_report(cli: &Cli, a: Option<&Path>, b: Option<&Path>) -> CliResult<Report> {
    let (rho1, rho2) = match (a, b) {
        (Some(a), Some(b)) => (load_state(a)?, load_state(b)?),
        (None, None) => {
            let dim = cli.dim.unwrap_or(3);
            if dim < 2 {
                return Err(Failure::validation("--dim must be at least 2"));
            }
            random_pair(dim, cli.seed, 0)
        }
        _ => return Err(Failure::validation("billiard takes either two state files or none")),
    };
    let opts = ScanOptions { zero_tol: cli.tol, ..ScanOptions::default() };
    if cli.format == Format::Csv {
        let samples = cli.samples.unwrap_or(2048) as usize;
        let path = geodesic(&rho1, &rho2)?;
        let mut s = String::from("t,lambda_min\n");
        for (t, lam) in lambda_min_profile(&path, samples.max(2)) {
            writeln!(s, "{},{}", num(t), num(lam)).unwrap();
        }
        return Ok(Report::Csv(s));
    }
    let r = verify_billiard_theorem(&rho1, &rho2, &opts)?;
    Ok(Report::Json(json!({
        "dim": r.dim,
        "seed": cli.seed,
        "t_star": r.t_star,
        "bounce_ts": r.bounce_ts,
        "kernel_states": r.kernel_states.iter().map(vector_to_json).collect::<Vec<_>>(),
        "m_eigenvalues": r.m_eigenvalues,
        "m_eigenvectors": r.m_eigenvectors.iter().map(vector_to_json).collect::<Vec<_>>(),
        "pairings": r.pairings,
        "max_infidelity": r.max_infidelity,
        "flags": r.flags,
        "matched": r.matched,
    })))
}

/// Outcome of one invocation.
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses arguments, runs the command and writes `--out` if requested.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Execution { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            let err = json!({ "error": "ParseError", "message": e.to_string() });
            return Execution { code: 1, stdout: String::new(), stderr: to_json_string(&err) };
        }
    };
    let failure = |f: Failure| {
        let stdout = if let Failure::Acceptance(v) = &f { to_json_string(v) } else { String::new() };
        Execution { code: f.exit_code(), stdout, stderr: to_json_string(&f.to_json()) }
    };
    match run(&cli) {
        Ok(report) => {
            let text = report.render();
            match &cli.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => Execution { code: 0, stdout: String::new(), stderr: String::new() },
                    Err(e) => failure(Failure::validation(format!("{}: {e}", path.display()))),
                },
                None => Execution { code: 0, stdout: text, stderr: String::new() },
            }
        }
        Err(f) => failure(f),
    }
}
