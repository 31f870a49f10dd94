//! Command-line front end: `run`, `sweep` and `audit`.
//!
//! Exit codes: 0 success, 2 usage or domain error, 3 degenerate or numerical
//! failure, 4 I/O error, 5 audit tolerance exceeded. Output is byte-stable:
//! fixed key and column order, floats as `{:.16e}` (17 significant digits),
//! and no timestamp unless `--stamp` is given.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::audit::grid::parse_value;
use crate::audit::{compare_paper_vs_sim, sweep, Column, GridSpec, ReportOptions, Tolerances};
use crate::error::Error;
use crate::qfi::{qfi_bloch_family, qfi_spectral};
use crate::quantum::BlochVector;
use crate::scalar::Real;
use crate::teleport::{run_scheme, Placement, PrPolicy, Scheme, SchemeConfig};

pub const THREADS_ENV: &str = "QFIPORT_THREADS";
const FORMAT_NOTE: &str = "floats in {:.16e} notation (17 significant digits)";

/// Renders a float with 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Pretty JSON with every float written by [`format_number`].
struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_number(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedValues {
    pub bloch: BlochVector<f64>,
    pub qfi: f64,
    /// Cross-checks; absent when the estimator declined (e.g. a level crossing).
    pub qfi_spectral: Option<f64>,
    pub qfi_bloch: Option<f64>,
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperValues {
    pub bloch: Option<BlochVector<f64>>,
    pub normalization: Option<f64>,
    pub qfi: f64,
    pub success_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Deviations {
    pub bloch: Option<f64>,
    pub qfi: Option<f64>,
    pub success_probability: Option<f64>,
}

/// Output of `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    /// The configuration with the strength policy resolved.
    pub config: SchemeConfig<f64>,
    pub simulated: SimulatedValues,
    pub paper: Option<PaperValues>,
    pub deviations: Deviations,
    pub notes: Vec<String>,
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
}

impl RunRecord {
    pub fn from_config(cfg: &SchemeConfig<f64>) -> crate::Result<Self> {
        let res = run_scheme(cfg)?;
        let resolved = res.config;
        let mut notes = res.notes.clone();
        let family = crate::teleport::output_family(resolved);
        let h = f64::fd_step();
        let mut cross = |name: &str, r: crate::Result<crate::qfi::QfiEstimate<f64>>| match r {
            Ok(e) => Some(e.value),
            Err(e) => {
                notes.push(format!("{name} estimator skipped: {e}"));
                None
            }
        };
        let qfi_spectral = cross("spectral", qfi_spectral(&family, resolved.phi, h));
        let qfi_bloch = cross("bloch", qfi_bloch_family(&family, resolved.phi, h));
        let simulated = SimulatedValues {
            bloch: res.bloch,
            qfi: res.qfi_simulated,
            qfi_spectral,
            qfi_bloch,
            success_probability: res.success_probability,
        };
        let paper = res.paper.map(|p| PaperValues {
            bloch: p.bloch.map(|b| b.vector()),
            normalization: p.bloch.map(|b| b.normalization),
            qfi: p.qfi,
            success_probability: p.success_probability,
        });
        let deviations = match &paper {
            None => Deviations::default(),
            Some(p) => Deviations {
                bloch: p.bloch.map(|b| {
                    b.components()
                        .iter()
                        .zip(simulated.bloch.components())
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max)
                }),
                qfi: Some((p.qfi - simulated.qfi).abs()),
                success_probability: p.success_probability.map(|s| (s - simulated.success_probability).abs()),
            },
        };
        Ok(RunRecord {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: resolved,
            simulated,
            paper,
            deviations,
            notes,
            format: FORMAT_NOTE.into(),
            stamp: None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "qfiport", version, about = "Teleported quantum Fisher information under amplitude damping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one configuration and print a JSON record.
    Run(RunArgs),
    /// Tabulate closed-form and simulated quantities over a grid as CSV.
    Sweep(SweepArgs),
    /// Compare simulation with the closed forms over a grid; JSON report.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Ad,
    A,
    B,
    TwoSided,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Fixed,
    PaperOpt,
    NumericOpt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlacementArg {
    Resource,
    PreCorrection,
    PostCorrection,
}

fn real(s: &str) -> Result<f64, String> {
    parse_value(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Polar angle of the input state [default: pi/2].
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Azimuthal angle, the estimated parameter.
    #[arg(long, value_parser = real, default_value = "0", allow_hyphen_values = true)]
    pub phi: f64,
    /// Damping of both resource qubits.
    #[arg(long, value_parser = real, default_value = "0", allow_hyphen_values = true)]
    pub gamma: f64,
    /// Damping of Bob's qubit, overriding --gamma.
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub gamma2: Option<f64>,
    /// Prior weak-measurement strength on both resource qubits.
    #[arg(long, value_parser = real, default_value = "0", allow_hyphen_values = true)]
    pub p: f64,
    /// Prior strength on Bob's qubit, overriding --p.
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub p2: Option<f64>,
    /// Post-measurement or reversal strength.
    #[arg(long, value_parser = real, conflicts_with = "pr_policy", allow_hyphen_values = true)]
    pub pr: Option<f64>,
    /// Post strength on Bob's qubit, overriding --pr.
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub pr2: Option<f64>,
    /// How to choose the post strength instead of --pr.
    #[arg(long, value_enum)]
    pub pr_policy: Option<PolicyArg>,
    #[arg(long, value_enum, default_value = "resource")]
    pub placement: PlacementArg,
    /// Read theta, phi and angle grid axes in degrees.
    #[arg(long)]
    pub deg: bool,
}

impl SchemeArgs {
    fn angle_scale(&self) -> f64 {
        if self.deg {
            std::f64::consts::PI / 180.0
        } else {
            1.0
        }
    }

    pub fn config(&self) -> crate::Result<SchemeConfig<f64>> {
        let k = self.angle_scale();
        let scheme = match self.scheme {
            SchemeArg::Ad => Scheme::Ad,
            SchemeArg::A => Scheme::A,
            SchemeArg::B => Scheme::B,
            SchemeArg::TwoSided => Scheme::TwoSided,
        };
        let theta = self.theta.map_or(std::f64::consts::FRAC_PI_2, |t| t * k);
        let mut cfg = SchemeConfig::new(scheme, theta, self.phi * k).gamma(self.gamma).p(self.p);
        if let Some(pr) = self.pr {
            cfg = cfg.pr(pr);
        }
        if let Some(v) = self.gamma2 {
            cfg.gamma2 = v;
        }
        if let Some(v) = self.p2 {
            cfg.p2 = v;
        }
        if let Some(v) = self.pr2 {
            cfg.pr2 = v;
        }
        cfg.pr_policy = match self.pr_policy {
            None | Some(PolicyArg::Fixed) => PrPolicy::Fixed,
            Some(PolicyArg::PaperOpt) => PrPolicy::PaperOptimal,
            Some(PolicyArg::NumericOpt) => PrPolicy::NumericOptimal,
        };
        cfg.placement = match self.placement {
            PlacementArg::Resource => Placement::OnResource,
            PlacementArg::PreCorrection => Placement::PostBellPreCorrection,
            PlacementArg::PostCorrection => Placement::PostBellPostCorrection,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn grid(&self, spec: &str) -> crate::Result<GridSpec> {
        let grid: GridSpec = spec.parse()?;
        Ok(if self.deg { grid.scale_angles(self.angle_scale()) } else { grid })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a timestamp to the record.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Axes as name=lo:hi:steps, comma separated; first axis varies slowest.
    #[arg(long)]
    pub grid: String,
    /// Comma-separated column names.
    #[arg(long)]
    pub columns: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Axes as name=lo:hi:steps, comma separated.
    #[arg(long)]
    pub grid: String,
    /// Asserted tolerances as QUANTITY=TOL, comma separated.
    #[arg(long = "assert")]
    pub assertions: Option<String>,
    /// Also compare numerically optimized strengths with the published ones (slow).
    #[arg(long)]
    pub optimize: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("audit failed: {0}")]
    AuditFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
            CliError::AuditFailed(_) => 5,
            CliError::Core(e) => match e {
                Error::Size { .. }
                | Error::Argument(_)
                | Error::Domain(_)
                | Error::Config(_)
                | Error::InvalidBloch { .. }
                | Error::Shape { .. } => 2,
                Error::NotConverged { .. }
                | Error::NotPsd { .. }
                | Error::DegenerateState(_)
                | Error::Crossing { .. }
                | Error::DegenerateRun(_) => 3,
            },
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => stdout.write_all(bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    to_json(v).map_err(|e| CliError::Usage(format!("serialization failed: {e}")))
}

fn unix_stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let cfg = args.scheme.config()?;
            let mut record = RunRecord::from_config(&cfg)?;
            if args.stamp {
                record.stamp = Some(unix_stamp());
            }
            emit(args.out.as_deref(), json(&record)?.as_bytes(), stdout)
        }
        Command::Sweep(args) => {
            let cfg = args.scheme.config()?;
            let grid = args.scheme.grid(&args.grid)?;
            let columns = Column::parse_list(&args.columns)?;
            let table = sweep(&cfg, &grid, &columns)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(|source| CliError::Io { path: "<buffer>".into(), source })?;
            emit(args.out.as_deref(), &buf, stdout)
        }
        Command::Audit(args) => {
            let cfg = args.scheme.config()?;
            let grid = args.scheme.grid(&args.grid)?;
            let tolerances: Tolerances = args.assertions.as_deref().unwrap_or("").parse()?;
            let report = compare_paper_vs_sim(&cfg, &grid, &tolerances, ReportOptions { optimize: args.optimize })?;
            emit(args.out.as_deref(), json(&report)?.as_bytes(), stdout)?;
            if report.passed {
                Ok(())
            } else {
                let failing: Vec<_> = report
                    .quantities
                    .iter()
                    .filter(|r| r.passed == Some(false))
                    .map(|r| format!("{}: max {:e} > {:e}", r.quantity, r.max_abs_dev, r.tolerance.unwrap_or(0.0)))
                    .collect();
                let _ = writeln!(stderr, "{} failed grid points", report.failures.len());
                Err(CliError::AuditFailed(failing.join("; ")))
            }
        }
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = thread_cap().and_then(|cap| match cap {
        None => execute(cli.command, stdout, stderr),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
            // buffered so the writers need not be Send
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let r = pool.install(|| execute(cli.command, &mut out, &mut err));
            let _ = stdout.write_all(&out);
            let _ = stderr.write_all(&err);
            r
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}
