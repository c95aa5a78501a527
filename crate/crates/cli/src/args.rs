use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "geophase",
    version,
    about = "Geometric phases of Gaussian states along symplectic paths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the phase along one configured path.
    Phase(CommonArgs),
    /// Tabulate squeeze-circle phases over a grid of R, hbar and length values.
    Sweep(CommonArgs),
    /// Run the built-in oracle checks and report pass/fail per check.
    Verify(VerifyArgs),
    /// Compare the closed-form sp(4) exponential with the dense one.
    Expm(ExpmArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Squeeze magnitude; a comma-separated list gives the sweep grid.
    #[arg(long = "R", value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Option<Vec<f64>>,

    /// Number of modes (1 or 2 for squeeze paths).
    #[arg(long)]
    pub modes: Option<usize>,

    /// Planck constant; a comma-separated list gives the sweep grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub hbar: Option<Vec<f64>>,

    /// Oscillator lengths: one per mode for `phase`, or a sweep grid applied to every mode.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub length: Option<Vec<f64>>,

    /// Path kind: squeeze1, squeeze2 or custom-samples.
    #[arg(long)]
    pub kind: Option<String>,

    /// Generator-sample file for custom-samples paths.
    #[arg(long)]
    pub samples: Option<PathBuf>,

    /// Absolute quadrature tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,

    /// Quadrature evaluation budget.
    #[arg(long)]
    pub max_evals: Option<usize>,

    /// RNG seed, echoed in every report.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Output file; stdout when absent. Relative paths resolve against
    /// $GEOPHASE_OUT_DIR when it is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Number of random generators in the exponential check.
    #[arg(long)]
    pub count: Option<usize>,

    /// Deliberately corrupt the named check (negative control).
    #[arg(long, hide = true)]
    pub perturb: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExpmArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Block a as four row-major entries.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true
    )]
    pub a: Option<Vec<f64>>,

    /// Block b as four row-major entries.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true
    )]
    pub b: Option<Vec<f64>>,

    /// Block c as four row-major entries.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true
    )]
    pub c: Option<Vec<f64>>,
}
