use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cuberoot", version, about = "Cube-root M-estimation, subsampling inference and Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate from a CSV file or a simulated sample.
    Estimate(Opts),
    /// Level-set estimate for the interval-regressor binary model.
    SetEstimate(Opts),
    /// Subsampling confidence interval.
    Subsample(Opts),
    /// Confidence set from inverting the criterion over a grid.
    Confset(Opts),
    /// Convergence-rate experiment.
    McRate(Opts),
    /// Coverage experiment.
    McCoverage(Opts),
    /// Normalized estimates against the simulated limit law.
    McLimit(Opts),
    /// Draws from the argmax limit law.
    LimitSim(Opts),
    /// Writes a simulated sample as CSV.
    Gen(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::SetEstimate(_) => "set-estimate",
            Command::Subsample(_) => "subsample",
            Command::Confset(_) => "confset",
            Command::McRate(_) => "mc-rate",
            Command::McCoverage(_) => "mc-coverage",
            Command::McLimit(_) => "mc-limit",
            Command::LimitSim(_) => "limit-sim",
            Command::Gen(_) => "gen",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Estimate(o)
            | Command::SetEstimate(o)
            | Command::Subsample(o)
            | Command::Confset(o)
            | Command::McRate(o)
            | Command::McCoverage(o)
            | Command::McLimit(o)
            | Command::LimitSim(o)
            | Command::Gen(o) => o,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Estimator id or inline JSON such as '{"estimator":"min_volume","alpha":0.9}'.
    #[arg(long)]
    pub estimator: Option<String>,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Model id, inline JSON, or path to a JSON file.
    #[arg(long)]
    pub dgp: Option<String>,
    /// Sample size; a comma-separated list for mc-rate.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bandwidth constant `c` in `h_n = c n^(-a)`.
    #[arg(long)]
    pub bandwidth_c: Option<f64>,
    /// Bandwidth exponent `a` in `h_n = c n^(-a)`.
    #[arg(long)]
    pub bandwidth_a: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Level-set cutoff; defaults to log n.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub block_len: Option<usize>,
    /// Parameter grid `lo:hi:count[,lo:hi:count...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON result path; tables go next to it as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Writes per-block statistics.
    #[arg(long)]
    pub dump_blocks: bool,
    /// Evaluation point (density estimator) or conditioning point.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<f64>,
    /// Coverage target: subsample, confset or set.
    #[arg(long)]
    pub target: Option<String>,
    /// Limit-law grid half-width.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Limit-law grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Limit-law draws.
    #[arg(long)]
    pub draws: Option<usize>,
}
