//! `klein`: stationary scattering off a sharp electrostatic step for the
//! one-dimensional Dirac equation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Overrides the directory of every output path when set.
pub const OUT_DIR_ENV: &str = "KLEIN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "klein", version, about, long_about = None)]
pub struct Cli {
    /// Particle mass (sets the unit of energy).
    #[arg(
        long = "m",
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub mass: f64,

    /// Step height.
    #[arg(
        long = "V",
        global = true,
        default_value_t = 4.0,
        allow_negative_numbers = true
    )]
    pub height: f64,

    /// Output path (file, or directory for `packet`); stdout when omitted.
    /// The directory part is replaced by $KLEIN_OUT_DIR when that is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitudes at a single energy (JSON by default).
    Solve(SolveArgs),
    /// Reflection and transmission over an energy range (CSV by default).
    Sweep(SweepArgs),
    /// Gaussian packet snapshots and penetration summary.
    Packet(PacketArgs),
    /// Compare closed-form reflection with smoothed-step integration.
    Verify(VerifyArgs),
    /// Zone boundaries for the given mass and step height.
    Zones,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Energy.
    #[arg(long = "E", allow_negative_numbers = true)]
    pub energy: f64,

    /// Weight of the virtual beam in the combined solution (Klein zone);
    /// defaults to the flux-matched value.
    #[arg(long)]
    pub weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Lowest energy (must exceed m).
    #[arg(long, allow_negative_numbers = true)]
    pub emin: f64,

    /// Highest energy.
    #[arg(long, allow_negative_numbers = true)]
    pub emax: f64,

    /// Number of evenly spaced samples (at least 2).
    #[arg(long, default_value_t = 201)]
    pub n: usize,

    /// Also write an SVG plot of R2 against E to this path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Treatment {
    /// Electron incidence plus flux-matched virtual incidence.
    Virtual,
    /// Electron incidence only.
    Traditional,
}

#[derive(Debug, Args)]
pub struct PacketArgs {
    /// Mean energy.
    #[arg(long = "E0", allow_negative_numbers = true)]
    pub center: f64,

    /// Energy spread.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,

    /// Final time; defaults to the time at which the packet has left the step.
    #[arg(long = "t")]
    pub time: Option<f64>,

    /// Number of energy samples.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Number of snapshots, evenly spaced from t = 0 to the final time.
    #[arg(long, default_value_t = 5)]
    pub snapshots: usize,

    /// Representation of Klein-zone components.
    #[arg(long, value_enum, default_value_t = Treatment::Virtual)]
    pub treatment: Treatment,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated energies; defaults to three interior points per zone.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub energies: Option<Vec<f64>>,

    /// Smallest smoothing width; the sequence is 4a, 2a, a.
    #[arg(long, default_value_t = 1e-3)]
    pub amin: f64,

    /// Integrator tolerance.
    #[arg(long, default_value_t = klein_core::oracle::DEFAULT_TOL)]
    pub tol: f64,

    /// Pass threshold on |R_exact - R_extrapolated|.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] klein_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                klein_core::ErrorKind::Input => 1,
                klein_core::ErrorKind::Numeric => 2,
            },
            CliError::Input(_) => 1,
            CliError::Failed(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
