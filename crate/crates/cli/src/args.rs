use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cockpit_sim::experiment::{DEFAULT_TRIALS, DEFAULT_TRIAL_LENGTH};

/// Discrete-event simulation of driver attention in an automated-vehicle cockpit.
///
/// Exit status: 0 on success, 1 when inputs fail validation or cannot be
/// read, 2 when a run fails after its inputs were accepted.
#[derive(Debug, Parser)]
#[command(name = "cockpit-sim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a task list, element catalog and optional scenario; list every violation.
    Validate(ValidateArgs),
    /// Simulate one trial; write metrics.csv, trace.jsonl, task_counts.csv and levels.csv.
    Run(RunArgs),
    /// Run two configurations (or an experiment plan) on shared seeds; write summary, scatter and paired CSVs.
    Compare(CompareArgs),
    /// Hill-climb over design moves; write moves.json and the optimized task CSV.
    Optimize(OptimizeArgs),
    /// Simulate one trial and write plot-ready timeline exports.
    ExportTrace(RunArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Task list CSV.
    #[arg(long)]
    pub tasks: PathBuf,
    /// Interface element catalog (TOML).
    #[arg(long)]
    pub elements: PathBuf,
    /// Workload scale override (TOML); the built-in scale is used when absent.
    #[arg(long)]
    pub scale: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, env = "COCKPIT_SIM_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Print load warnings and extra detail.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Trials per configuration.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// File of master seeds (whitespace or comma separated, `#` comments); the first `--trials` are used.
    #[arg(long)]
    pub seeds_file: Option<PathBuf>,
    /// Virtual seconds per trial.
    #[arg(long, default_value_t = DEFAULT_TRIAL_LENGTH)]
    pub length: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Scenario (TOML) to check on its own and against the configuration.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Scenario (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Master seed of the trial.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Virtual seconds to simulate.
    #[arg(long, default_value_t = DEFAULT_TRIAL_LENGTH)]
    pub length: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Task list CSV; give exactly two unless --plan is used.
    #[arg(long, conflicts_with = "plan")]
    pub tasks: Vec<PathBuf>,
    /// Interface element catalog shared by both task lists.
    #[arg(long, required_unless_present = "plan", conflicts_with = "plan")]
    pub elements: Option<PathBuf>,
    /// Workload scale override (TOML).
    #[arg(long, conflicts_with = "plan")]
    pub scale: Option<PathBuf>,
    /// Scenario (TOML).
    #[arg(long, required_unless_present = "plan", conflicts_with = "plan")]
    pub scenario: Option<PathBuf>,
    /// Experiment plan (TOML) naming configurations, scenario, trial count and length.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Trials per configuration (defaults to the plan's value with --plan).
    #[arg(long)]
    pub trials: Option<usize>,
    /// File of master seeds; the first `--trials` are used.
    #[arg(long)]
    pub seeds_file: Option<PathBuf>,
    /// Virtual seconds per trial (defaults to the plan's value with --plan).
    #[arg(long)]
    pub length: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Scenario (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Minimum median situation awareness (%) a configuration must keep.
    #[arg(long)]
    pub sa_floor: f64,
    /// Candidate configurations to evaluate at most.
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
    /// Weights of cognitive overload, perceptual overload and eyes-off, e.g. `1,1,1`.
    #[arg(long, default_value = "1,1,1")]
    pub weights: String,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub out: OutArgs,
}
