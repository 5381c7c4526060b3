//! Command-line surface. `run` parses arguments, dispatches, writes reports and
//! returns the process exit code.
//!
//! Exit codes: 0 success, 2 regime or domain error, 3 failed verification or
//! convergence, 64 usage error, 1 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::closed_form::{self, CandidateKind, CandidateMinimizer, Regime};
use crate::error::Error;
use crate::flow::{self, FlowOptions};
use crate::potentials::{total_potential, KernelParams};
use crate::verify::{self, ConvexityReport, ELReport};

pub const SCHEMA: &str = "aggremin/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_REGIME: i32 = 2;
pub const EXIT_FAILED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "aggremin", version, about = "Explicit minimizers of attractive-repulsive interaction energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime, radius, energy and potential level of the minimizer
    ClosedForm {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Euler-Lagrange check of the candidate, plus convexity in the sphere case
    VerifyEl {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 25.0)]
        rho_max: f64,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Test the uniform sphere of radius R_{alpha,beta} whatever the regime
        #[arg(long)]
        force_sphere: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Second differences of the sphere comparison function Psi
    Convexity {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 10.0)]
        rho_max: f64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Particle gradient flow; writes positions.csv, trace.csv and stats.json
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Accept an unconverged run with exit code 0
        #[arg(long)]
        allow_partial: bool,
        /// Fixed summation order, bit-identical reruns
        #[arg(long)]
        deterministic: bool,
    },
    /// Regimes, radii and energies over a grid of the (alpha, beta) plane
    PhaseScan {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha_max: f64,
        /// Excluded lower end of the beta range; defaults to -d
        #[arg(long, allow_hyphen_values = true)]
        beta_min: Option<f64>,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        beta_max: f64,
        #[arg(long, default_value_t = 20)]
        n_alpha: usize,
        #[arg(long, default_value_t = 20)]
        n_beta: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Logarithmic repulsion: beta = 0 read as ln|x|
    #[arg(long)]
    log_beta: bool,
    /// Logarithmic attraction: alpha = 0 read as ln|x|
    #[arg(long)]
    log_alpha: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl ParamArgs {
    fn build(&self) -> Result<KernelParams, Failure> {
        let alpha = match (self.alpha, self.log_alpha) {
            (Some(a), _) => a,
            (None, true) => 0.0,
            (None, false) => return Err(Failure::Usage("--alpha is required unless --log-alpha is given".into())),
        };
        let beta = match (self.beta, self.log_beta) {
            (Some(b), _) => b,
            (None, true) => 0.0,
            (None, false) => return Err(Failure::Usage("--beta is required unless --log-beta is given".into())),
        };
        Ok(KernelParams::with_flags(self.d, alpha, beta, self.log_alpha, self.log_beta)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub schema: String,
    pub params: KernelParams,
    pub regime: Regime,
    pub regime_detail: String,
    pub beta_star: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub eta: f64,
    pub density_description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub params: KernelParams,
    pub candidate: CandidateMinimizer,
    pub forced_sphere: bool,
    pub euler_lagrange: ELReport,
    /// absent for the ball profile
    pub convexity: Option<ConvexityReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCmdReport {
    pub schema: String,
    pub params: KernelParams,
    pub convexity: ConvexityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormComparison {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// mean radius against R for a sphere, max radius against R for a ball
    pub radius_rel_err: f64,
    pub energy_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema: String,
    pub params: KernelParams,
    pub n: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub max_force: f64,
    pub final_energy: f64,
    pub mean_radius: f64,
    pub std_radius: f64,
    pub max_radius: f64,
    pub center: Vec<f64>,
    pub closed_form: Option<ClosedFormComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema: String,
    pub error: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub alpha: f64,
    pub beta: f64,
    pub regime: String,
    pub beta_star: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[serde(rename = "E")]
    pub e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanReport {
    pub schema: String,
    pub d: usize,
    pub rows: Vec<PhaseRow>,
}

pub const PHASE_HEADER: &str = "alpha,beta,regime,beta_star,R,E";

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Pole(_) | Error::Domain(_) | Error::Regime(_) | Error::IllConditioned(_) => EXIT_REGIME,
        Error::NonConvergence(_) | Error::QuadratureFailure(_) | Error::Stall { .. } => EXIT_FAILED,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Pole(_) => "pole",
        Error::Domain(_) => "domain",
        Error::Regime(_) => "regime",
        Error::IllConditioned(_) => "ill_conditioned",
        Error::NonConvergence(_) => "non_convergence",
        Error::QuadratureFailure(_) => "quadrature_failure",
        Error::Stall { .. } => "stall",
    }
}

fn reason(err: &Error) -> String {
    match err {
        Error::Regime(s) | Error::Domain(s) | Error::IllConditioned(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
        Err(Failure::Lib(e)) => {
            let report = ErrorReport { schema: SCHEMA.into(), error: error_kind(&e).into(), reason: reason(&e) };
            let _ = writeln!(out, "{}", to_json(&report));
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports contain only serializable fields")
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match dest {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_only(output: &OutputArgs, command: &str) -> Result<(), Failure> {
    if output.format == Format::Csv {
        return Err(Failure::Usage(format!("{command} has no csv output")));
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::ClosedForm { params, output } => {
            let report = closed_form_report(&params.build()?)?;
            let text = match output.format {
                Format::Json => to_json(&report) + "\n",
                Format::Csv => format!(
                    "regime,beta_star,R,E,eta\n{:?},{:?},{:?},{:?},{:?}\n",
                    report.regime, report.beta_star, report.r, report.e, report.eta
                ),
            };
            emit(&text, output.out.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::VerifyEl { params, rho_max, grid, force_sphere, output } => {
            json_only(&output, "verify-el")?;
            let report = verify_report(&params.build()?, rho_max, grid, force_sphere)?;
            emit(&(to_json(&report) + "\n"), output.out.as_deref(), out)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Convexity { params, rho_max, grid, output } => {
            json_only(&output, "convexity")?;
            let params = params.build()?;
            let convexity = verify::convexity_report(&params, rho_max, grid)?;
            let passed = convexity.passed;
            let report = ConvexityCmdReport { schema: SCHEMA.into(), params, convexity };
            emit(&(to_json(&report) + "\n"), output.out.as_deref(), out)?;
            Ok(if passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Simulate { params, n, seed, tol, max_iter, out: dir, allow_partial, deterministic } => {
            if n < 16 {
                return Err(Failure::Usage(format!("--n must be at least 16, got {n}")));
            }
            if !(tol > 0.0) {
                return Err(Failure::Usage(format!("--tol must be positive, got {tol}")));
            }
            let params = params.build()?;
            let opts = FlowOptions { tol, max_iter, deterministic };
            let outcome = flow::run_to_convergence(&params, n, seed, &opts)?;
            let report = simulate_report(&params, n, seed, &outcome);
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("positions.csv"), outcome.system.positions_csv())?;
            fs::write(dir.join("trace.csv"), outcome.system.trace_csv())?;
            let text = to_json(&report) + "\n";
            fs::write(dir.join("stats.json"), &text)?;
            out.write_all(text.as_bytes())?;
            Ok(if outcome.converged || allow_partial { EXIT_OK } else { EXIT_FAILED })
        }
        Command::PhaseScan { d, alpha_min, alpha_max, beta_min, beta_max, n_alpha, n_beta, output } => {
            let beta_min = beta_min.unwrap_or(-(d as f64));
            let rows = phase_scan(d, (alpha_min, alpha_max), (beta_min, beta_max), n_alpha, n_beta)?;
            let text = match output.format {
                Format::Csv => phase_csv(&rows),
                Format::Json => to_json(&PhaseScanReport { schema: SCHEMA.into(), d, rows }) + "\n",
            };
            emit(&text, output.out.as_deref(), out)?;
            Ok(EXIT_OK)
        }
    }
}

pub fn closed_form_report(params: &KernelParams) -> Result<ClosedFormReport, Error> {
    let tag = closed_form::classify(params)?;
    if !tag.is_supported() {
        return Err(Error::Regime(tag.detail));
    }
    let candidate = closed_form::candidate(params)?;
    let r = candidate.radius;
    let density_description = match candidate.kind {
        CandidateKind::UniformSphere => format!("uniform probability measure on the sphere |x| = {r:?}"),
        CandidateKind::BallProfile => format!(
            "density {:?} (R^2 - |x|^2)^{:?} on the ball |x| < R = {r:?}",
            candidate.normalization,
            (2.0 - params.beta - params.dim()) / 2.0
        ),
    };
    Ok(ClosedFormReport {
        schema: SCHEMA.into(),
        params: *params,
        regime: tag.tag,
        regime_detail: tag.detail,
        beta_star: closed_form::beta_star(params.d, params.alpha),
        r,
        e: closed_form::energy(params)?,
        eta: closed_form::eta(params)?,
        density_description,
    })
}

/// With `force_sphere` the uniform sphere of radius R_{alpha,beta} is tested
/// and eta is its own potential level.
pub fn verify_report(params: &KernelParams, rho_max: f64, grid: usize, force_sphere: bool) -> Result<VerifyReport, Error> {
    let (candidate, eta) = if force_sphere {
        let c = closed_form::forced_sphere_candidate(params)?;
        let eta = total_potential(params, &c, c.radius)?;
        (c, eta)
    } else {
        (closed_form::candidate(params)?, closed_form::eta(params)?)
    };
    let el = verify::verify_candidate(params, &candidate, eta, rho_max, grid)?;
    let convexity = match candidate.kind {
        CandidateKind::UniformSphere => Some(verify::convexity_report(params, rho_max.min(10.0), 400)?),
        CandidateKind::BallProfile => None,
    };
    let passed = el.passed && convexity.as_ref().is_none_or(|c| c.passed);
    Ok(VerifyReport {
        schema: SCHEMA.into(),
        params: *params,
        candidate,
        forced_sphere: force_sphere,
        euler_lagrange: el,
        convexity,
        passed,
    })
}

fn simulate_report(params: &KernelParams, n: usize, seed: u64, outcome: &flow::FlowOutcome) -> SimulateReport {
    let sys = &outcome.system;
    let stats = &outcome.stats;
    let comparison = closed_form::candidate(params).ok().and_then(|c| {
        let e = closed_form::energy(params).ok()?;
        let measured = match c.kind {
            CandidateKind::UniformSphere => stats.mean_radius,
            CandidateKind::BallProfile => stats.max_radius,
        };
        Some(ClosedFormComparison {
            r: c.radius,
            e,
            radius_rel_err: (measured - c.radius).abs() / c.radius,
            energy_rel_err: (sys.energy() - e).abs() / e.abs(),
        })
    });
    SimulateReport {
        schema: SCHEMA.into(),
        params: *params,
        n,
        seed,
        iterations: sys.iteration,
        converged: outcome.converged,
        max_force: sys.max_force(),
        final_energy: sys.energy(),
        mean_radius: stats.mean_radius,
        std_radius: stats.std_radius,
        max_radius: stats.max_radius,
        center: stats.center.clone(),
        closed_form: comparison,
    }
}

/// Rows of the (alpha, beta) scan. alpha takes n_alpha equispaced values with
/// both ends; beta takes the right ends of n_beta equal cells of
/// (beta_min, beta_max]. Pairs with beta >= alpha are skipped, and beta = 0 is
/// read as the log kernel.
fn phase_scan(
    d: usize,
    (alpha_min, alpha_max): (f64, f64),
    (beta_min, beta_max): (f64, f64),
    n_alpha: usize,
    n_beta: usize,
) -> Result<Vec<PhaseRow>, Failure> {
    let df = d as f64;
    if d == 0 {
        return Err(Failure::Usage("--d must be at least 1".into()));
    }
    if !(alpha_min < alpha_max) || !(beta_min < beta_max) {
        return Err(Failure::Usage("scan ranges must satisfy min < max".into()));
    }
    if alpha_min < 2.0 || alpha_max > 4.0 || beta_min < -df || beta_max > 2.0 {
        return Err(Failure::Usage(format!("scan ranges must lie in alpha in [2, 4], beta in (-{d}, 2]")));
    }
    if n_alpha < 2 || n_beta < 1 {
        return Err(Failure::Usage("need --n-alpha >= 2 and --n-beta >= 1".into()));
    }
    let mut rows = Vec::new();
    for i in 0..n_alpha {
        let alpha = if i == n_alpha - 1 {
            alpha_max
        } else {
            alpha_min + (alpha_max - alpha_min) * i as f64 / (n_alpha - 1) as f64
        };
        for j in 0..n_beta {
            let beta = beta_min + (beta_max - beta_min) * (j + 1) as f64 / n_beta as f64;
            if beta >= alpha {
                continue;
            }
            rows.push(phase_row(d, alpha, beta)?);
        }
    }
    Ok(rows)
}

fn phase_row(d: usize, alpha: f64, beta: f64) -> Result<PhaseRow, Failure> {
    let params = if beta == 0.0 { KernelParams::log_beta(d, alpha)? } else { KernelParams::new(d, alpha, beta)? };
    let beta_star = closed_form::beta_star(d, alpha);
    let tag = closed_form::classify(&params)?;
    let regime = match tag.tag {
        Regime::SphereTheorem1 if (beta - beta_star).abs() <= 1e-12 => "Boundary/Sphere",
        Regime::SphereTheorem1 => "Sphere",
        Regime::BallTheorem2 => "Ball",
        Regime::Boundary => "Boundary",
        Regime::OutOfScope => "OutOfScope",
    };
    let (r, e) = if tag.is_supported() {
        (Some(closed_form::radius(&params)?), Some(closed_form::energy(&params)?))
    } else {
        (None, None)
    };
    Ok(PhaseRow { alpha, beta, regime: regime.into(), beta_star, r, e })
}

fn phase_csv(rows: &[PhaseRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    let mut text = String::from(PHASE_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&format!(
            "{:?},{:?},{},{:?},{},{}\n",
            row.alpha,
            row.beta,
            row.regime,
            row.beta_star,
            cell(row.r),
            cell(row.e)
        ));
    }
    text
}
