use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use overlap_ec::algo::{EndgameMode, FOfN};

#[derive(Debug, Parser)]
#[command(name = "overlap-ec", version, about = "Bounds, simulations and exhaustive oracles for random k-Exact-Cover")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Window half-width is n^e on the agreement-count scale.
    #[arg(long, global = true, default_value_t = 0.75)]
    pub epsilon_exponent: f64,

    /// Endgame component limit: `ln2` = (ln n)^2, `<c>ln` = c ln n, or a number.
    #[arg(long, global = true, default_value = "ln2", value_parser = parse_f_of_n)]
    pub f_of_n: FOfN,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_f_of_n(s: &str) -> Result<FOfN, String> {
    s.parse().map_err(|e: overlap_ec::EcError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random instance and write it in the `p ec` text format.
    Gen(GenArgs),
    /// Tabulate r_lb(q) and r_up(q, k) over a grid of overlaps.
    Bounds(BoundsArgs),
    /// Run a campaign of lazy largest-clause runs.
    Simulate(SimulateArgs),
    /// Exhaustive solution-space report for a small instance.
    Oracle(OracleArgs),
    /// Campaigns over a grid of (n, r, k), optionally with overlap targets.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(short = 'm', long)]
    pub m: usize,
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    /// Output file (stdout when omitted, without a manifest).
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    /// Explicit overlap values; overrides the linear grid.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub q_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub q_max: f64,
    #[arg(long, default_value_t = 99)]
    pub q_points: usize,
    /// Required |t(G(r_up))|; rows above it are flagged and r_up is withheld.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Accuracy of each inner inversion |F(G(r)) - r|.
    #[arg(long, default_value_t = 1e-12)]
    pub domain_tol: f64,
    #[arg(long, default_value_t = 20.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub grid_points: usize,
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Default,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndgameArg {
    Drain,
    KeepLazy,
}

impl From<EndgameArg> for EndgameMode {
    fn from(e: EndgameArg) -> Self {
        match e {
            EndgameArg::Drain => EndgameMode::Drain,
            EndgameArg::KeepLazy => EndgameMode::KeepLazy,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    /// Clause density; m = round(r n), ties to even.
    #[arg(short = 'r', long)]
    pub r: f64,
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Default)]
    pub schedule: ScheduleArg,
    /// Perturbation size of the adaptive schedule.
    #[arg(long, default_value_t = 0.01)]
    pub adaptive_epsilon: f64,
    #[arg(long, value_enum, default_value_t = EndgameArg::Drain)]
    pub endgame: EndgameArg,
    /// Overlap targets to tune every returned pair to.
    #[arg(long, value_delimiter = ',')]
    pub tune: Vec<f64>,
    /// Write one empirical trajectory CSV per run.
    #[arg(long)]
    pub trajectories: bool,
    /// Write one JSON-lines step log per run.
    #[arg(long)]
    pub log: bool,
    /// Output directory (summary JSON on stdout when omitted).
    #[arg(short = 'o', long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Instance file in the `p ec` format.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pub instance: Option<PathBuf>,
    #[arg(short = 'n', long, requires = "m")]
    pub n: Option<usize>,
    #[arg(short = 'm', long, requires = "n")]
    pub m: Option<usize>,
    #[arg(short = 'k', long, default_value_t = 3)]
    pub k: usize,
    /// Window centre.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Window half-width on the overlap scale; overrides n^e / n.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Cluster radius (default: largest hypergraph component).
    #[arg(short = 'l', long)]
    pub l: Option<usize>,
    /// Also report the first-moment sum E[Z] for the same n, m, k, window.
    #[arg(long)]
    pub expected_z: bool,
    #[arg(long, default_value_t = overlap_ec::oracle::DEFAULT_MAX_VARS)]
    pub max_vars: usize,
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep description; command-line grids override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short = 'n', long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(short = 'r', long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[arg(short = 'k', long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}
