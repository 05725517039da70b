use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

/// Design, simulate and reconstruct metasurface polarization tomography.
#[derive(Debug, Parser)]
#[command(name = "qmeta", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output file; a `<out>.manifest.json` is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for shot-noise sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Suppress summaries and warnings.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal platonic port frame, or the condition numbers of a transfer matrix.
    Frame(FrameArgs),
    /// Synthesize a metagrating for an elliptical polarization pair.
    Design(DesignArgs),
    /// Predict correlations, delay scans or sampled counts.
    Simulate(SimulateArgs),
    /// Estimate a density matrix from correlation data.
    Reconstruct(ReconstructArgs),
    /// Purity, concurrence and fidelity of a density matrix.
    Analyze(AnalyzeArgs),
    /// Gaussian-plus-offset fit of a coincidence histogram.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// Number of ports (6, 8, 12 or 20).
    #[arg(
        long,
        conflicts_with = "transfer",
        required_unless_present = "transfer"
    )]
    pub ports: Option<usize>,
    /// Rotate the frame by a unit quaternion `w,x,y,z`.
    #[arg(long, value_parser = parse_list::<4>, allow_hyphen_values = true)]
    pub rotation: Option<[f64; 4]>,
    /// Report on an existing transfer matrix instead (`published` for the built-in one).
    #[arg(long)]
    pub transfer: Option<String>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Ellipse angle α in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Relative phase β in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Meta-atoms per super-cell.
    #[arg(long, default_value_t = 8)]
    pub atoms: usize,
    /// Phase of atom 0 in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 800.0)]
    pub lattice_nm: f64,
    /// Read angles as radians.
    #[arg(long)]
    pub radians: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Transfer-matrix JSON, or `published`.
    #[arg(long)]
    pub transfer: String,
    /// Density-matrix JSON.
    #[arg(long, conflicts_with = "qwp")]
    pub state: Option<PathBuf>,
    /// Use the quarter-wave-plate state at this angle (degrees) instead of a file.
    #[arg(long, allow_hyphen_values = true)]
    pub qwp: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub photons: usize,
    /// Scan the pair delay between two ports (1-based).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub hom: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.58, allow_hyphen_values = true)]
    pub eta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_tau: f64,
    /// Delay grid `start,stop,points`; default ±8σ in 161 points.
    #[arg(long, value_parser = parse_list::<3>, allow_hyphen_values = true)]
    pub delays: Option<[f64; 3]>,
    /// Draw Poisson counts with this many shots per unit expectation.
    #[arg(long)]
    pub shots: Option<f64>,
    /// Rescale expected values to sum to one.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Linear,
    Mle,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub transfer: String,
    /// Correlation-set JSON (counts or expected values).
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
    pub method: MethodArg,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `time_ns,counts`.
    #[arg(long)]
    pub histogram: PathBuf,
    /// Quantity reported as the coincidence count.
    #[arg(long, value_enum, default_value_t = MeasureArg::Area)]
    pub measure: MeasureArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Area,
    Peak,
}

fn parse_list<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use qmeta_core::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::FitDiverged { .. } | Error::NoSolution { .. }) => 3,
        _ => err
            .downcast_ref::<commands::NotConverged>()
            .map_or(2, |_| 3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
