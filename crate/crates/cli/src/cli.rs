use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Analytic solutions, reference solvers and convergence studies for the
/// passive EMI model.
#[derive(Debug, Parser)]
#[command(
    name = "emi",
    version,
    propagate_version = true,
    after_help = "Exit status: 0 success, 2 configuration error, 3 numeric failure.\nErrors are printed to stderr as a single line: error[config|numeric|io]: <message>"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the exact fields of a preset at one point and time.
    Eval(EvalArgs),
    /// Integrate one preset at one refinement level and print its errors.
    Run(RunArgs),
    /// Run a refinement schedule and write CSV and Markdown reports.
    Convergence(ConvergenceArgs),
    /// Write the manufactured solution on a sampling lattice as CSV files.
    ExportMms(ExportArgs),
    /// Check the analytic families against their equations by finite differences.
    ValidateAnalytic(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Preset: exp1, exp2 or exp3.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Radius; evaluates at (r, 0, 0).
    #[arg(long, conflicts_with_all = ["x", "y", "z"])]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Time.
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    /// Restrict output to cell k and its junctions.
    #[arg(long, value_name = "K")]
    pub cell: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Start of the time window.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// End of the time window.
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Box boundary data for exp3: zero or trace.
    #[arg(long)]
    pub boundary: Option<String>,
    /// Relative residual target of the exp3 linear solves.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Stamp used in report file names instead of the current UTC time.
    #[arg(long, value_name = "STAMP")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Mesh size (radial c_l or Cartesian h).
    #[arg(long)]
    pub c_l: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub n_f: Option<usize>,
    /// Also write the final exp3 state in the volume export schema.
    #[arg(long)]
    pub snapshot: bool,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Rows as c_l:n_f pairs, e.g. 0.4:7,0.2:14.
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Samples per cell along each axis: n or nx,ny,nz.
    #[arg(long)]
    pub samples: Option<String>,
    /// Comma-separated times.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<String>,
    /// Amplitudes A^k, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
    /// Extracellular amplitude B.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// File name prefix.
    #[arg(long)]
    pub prefix: Option<String>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Preset to check; all three when omitted.
    #[arg(long)]
    pub preset: Option<String>,
    /// Samples per preset.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest admissible residual.
    #[arg(long)]
    pub threshold: Option<f64>,
}
