//! Command-line front end behind the `prmzi` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::format::g12;
use crate::landscape::{self, OptimumRecord, DEFAULT_GRID_SEED};
use crate::metrology::{merit_report, Metric};
use crate::params::LoopParameters;
use crate::recycling::closed_form_coefficients;
use crate::verify::{run_checks, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "prmzi", version, about = "Photon-recycled Mach-Zehnder interferometer metrology")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every figure of merit at one operating point
    Point(PointArgs),
    /// One factor on a (phi, theta0) grid at fixed loss, as CSV
    Sweep(SweepArgs),
    /// Maximum of one factor over (phi, theta0) for each loss
    Optimize(OptimizeArgs),
    /// Run the self-consistency suites
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long)]
    pub loss: f64,
    /// Coherent amplitude |alpha|
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_phase: f64,
    /// Read the angles in degrees
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub metric: Metric,
    #[arg(long)]
    pub loss: f64,
    /// Points per axis
    #[arg(long, default_value_t = DEFAULT_GRID_SEED)]
    pub n: usize,
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long)]
    pub n_theta0: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub metric: Metric,
    #[arg(long, value_delimiter = ',', required = true)]
    pub losses: Vec<f64>,
    /// Side of the coarse seeding grid
    #[arg(long, default_value_t = DEFAULT_GRID_SEED)]
    pub grid: usize,
    /// Final compass step in radians
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = VerifyConfig::default().points)]
    pub points: usize,
    #[arg(long, value_delimiter = ',', default_values_t = VerifyConfig::default().losses)]
    pub losses: Vec<f64>,
    /// Fixed cascade length instead of the converged one
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long, default_value_t = VerifyConfig::default().stage_tol)]
    pub stage_tol: f64,
    #[arg(long, default_value_t = VerifyConfig::default().grid)]
    pub grid: usize,
    #[arg(long, default_value_t = VerifyConfig::default().step)]
    pub step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&config.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_USAGE
        }
    }
}

/// A failure that ends the invocation with exit code 2.
#[derive(Debug)]
pub enum CliError {
    Model(Error),
    Usage(String),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "error: {}: {e}", e.kind()),
            CliError::Usage(msg) => write!(f, "error: usage: {msg}"),
            CliError::Io(e) => write!(f, "error: io: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (output, body, code) = match command {
        Command::Point(args) => (&args.output, cmd_point(args)?, EXIT_OK),
        Command::Sweep(args) => (&args.output, cmd_sweep(args)?, EXIT_OK),
        Command::Optimize(args) => {
            let (body, code) = cmd_optimize(args)?;
            (&args.output, body, code)
        }
        Command::Verify(args) => {
            let (body, code) = cmd_verify(args)?;
            (&args.output, body, code)
        }
    };
    match &output.out {
        Some(path) => write_atomically(path, body.as_bytes())?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(code)
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn complex_pair(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_point(args: &PointArgs) -> Result<String, CliError> {
    let to_rad = |x: f64| if args.degrees { x.to_radians() } else { x };
    let params = LoopParameters {
        phi: to_rad(args.phi),
        theta0: to_rad(args.theta0),
        loss: args.loss,
        alpha_mag: args.alpha,
        alpha_phase: to_rad(args.alpha_phase),
    }
    .validated()?;
    let report = merit_report(&params)?;
    let coefficients = closed_form_coefficients(&params)?;

    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut value = serde_json::to_value(report).expect("report serialises");
            let map = value.as_object_mut().expect("object");
            map.insert("upsilon".into(), complex_pair(coefficients.upsilon));
            map.insert("xi".into(), complex_pair(coefficients.xi));
            let mut text = serde_json::to_string_pretty(&value).expect("json");
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let header = "lambda1,lambda2,lambda3,dphi_hd,dphi_qcrb,n_a_out,n_b_out,n_total_inside,upsilon_re,upsilon_im,xi_re,xi_im";
            let row = [
                report.lambda1,
                report.lambda2,
                report.lambda3,
                report.dphi_hd,
                report.dphi_qcrb,
                report.n_a_out,
                report.n_b_out,
                report.n_total_inside,
                coefficients.upsilon.re,
                coefficients.upsilon.im,
                coefficients.xi.re,
                coefficients.xi.im,
            ]
            .map(g12)
            .join(",");
            Ok(format!("{header}\n{row}\n"))
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let n_phi = args.n_phi.unwrap_or(args.n);
    let n_theta0 = args.n_theta0.unwrap_or(args.n);
    let grid = landscape::sweep(args.metric, args.loss, n_phi, n_theta0)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::with_capacity(40 * n_phi * n_theta0 + 32);
            out.push_str("phi,theta0,value\n");
            for (phi, row) in grid.phi_points.iter().zip(&grid.values) {
                let phi = g12(*phi);
                for (theta0, value) in grid.theta0_points.iter().zip(row) {
                    let _ = writeln!(out, "{phi},{},{}", g12(*theta0), g12(*value));
                }
            }
            Ok(out)
        }
        Format::Json => {
            let mut text = serde_json::to_string(&grid).expect("json");
            text.push('\n');
            Ok(text)
        }
    }
}

fn validate_losses(losses: &[f64]) -> Result<(), CliError> {
    if losses.is_empty() {
        return Err(CliError::Usage("--losses must not be empty".into()));
    }
    for &loss in losses {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::Domain {
                name: "loss",
                value: loss,
                expected: "[0, 1]",
            }
            .into());
        }
    }
    Ok(())
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<(String, i32), CliError> {
    validate_losses(&args.losses)?;
    if !(1e-10..=1e-2).contains(&args.tol) {
        return Err(Error::Domain {
            name: "tol",
            value: args.tol,
            expected: "[1e-10, 1e-2]",
        }
        .into());
    }
    if args.grid < 2 || (args.grid as u64).pow(2) > landscape::MAX_GRID_POINTS {
        return Err(CliError::Usage(format!("--grid {} is outside [2, 10000]", args.grid)));
    }

    let results = landscape::loss_curve(args.metric, &args.losses, args.grid, args.tol);
    let successes = results.iter().filter(|r| r.is_ok()).count();
    let code = if successes > 0 { EXIT_OK } else { EXIT_USAGE };

    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("loss,metric,lambda_max,phi_star,theta0_star,evaluations,error\n");
            for (loss, result) in args.losses.iter().zip(&results) {
                let _ = match result {
                    Ok(r) => writeln!(
                        out,
                        "{},{},{},{},{},{},",
                        g12(r.loss),
                        r.metric,
                        g12(r.lambda_max),
                        g12(r.phi_star),
                        g12(r.theta0_star),
                        r.evaluations
                    ),
                    Err(e) => writeln!(out, "{},{},,,,,{}", g12(*loss), args.metric, e.kind()),
                };
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = args
                .losses
                .iter()
                .zip(&results)
                .map(|(loss, result)| match result {
                    Ok(r) => serde_json::to_value(r).expect("record serialises"),
                    Err(e) => json!({
                        "loss": loss,
                        "metric": args.metric,
                        "error": e.kind(),
                        "detail": e.to_string(),
                    }),
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows).expect("json");
            text.push('\n');
            text
        }
    };
    Ok((body, code))
}

/// Optimum records of a successful `optimize` run, parsed back from JSON.
pub fn parse_optimum_records(json_text: &str) -> serde_json::Result<Vec<OptimumRecord>> {
    serde_json::from_str(json_text)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(String, i32), CliError> {
    validate_losses(&args.losses)?;
    if args.stages == Some(0) {
        return Err(CliError::Usage("--stages must be at least 1".into()));
    }
    if !(args.step > 0.0 && args.step <= 1e-3) {
        return Err(Error::Domain {
            name: "step",
            value: args.step,
            expected: "(0, 1e-3]",
        }
        .into());
    }
    if !(args.stage_tol > 0.0 && args.stage_tol.is_finite()) || args.grid < 2 {
        return Err(CliError::Usage("--stage-tol must be positive and --grid at least 2".into()));
    }
    let config = VerifyConfig {
        seed: args.seed,
        points: args.points,
        losses: args.losses.clone(),
        stages: args.stages,
        stage_tol: args.stage_tol,
        grid: args.grid,
        step: args.step,
        ..VerifyConfig::default()
    };
    let checks = run_checks(&config);
    let code = if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    };
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("check,max_deviation,tolerance,pass,samples\n");
            for c in &checks {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.check,
                    g12(c.max_deviation),
                    g12(c.tolerance),
                    c.pass,
                    c.samples
                );
            }
            out
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&checks).expect("json");
            text.push('\n');
            text
        }
    };
    Ok((body, code))
}
