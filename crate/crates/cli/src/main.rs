//! `gcid`: evaluate, sample and check generalized coverage processes from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::UsageError;

#[derive(Debug, Parser)]
#[command(name = "gcid", version, about = "GCID processes: joint CFs, exact sampling, coverage and ON/OFF simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Flags take precedence over `--config`.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of replications.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Model inputs, given as JSON values or comma-separated lists.
#[derive(Debug, Clone, Default, Args)]
pub struct Inputs {
    /// Lévy exponent, e.g. '{"kind":"poisson","rate":1}'.
    #[arg(long)]
    pub law: Option<String>,
    /// Correlation structure H, e.g. '{"kind":"exponential","rate":1}'.
    #[arg(long)]
    pub structure: Option<String>,
    /// Coverage model, e.g. '{"arrival_rate":1,"service":{"kind":"exponential","rate":1}}'.
    #[arg(long)]
    pub model: Option<String>,
    /// ON/OFF array, e.g. '{"mu":1,"kind":"power_example","alpha":0.5,"b":0.5}'.
    #[arg(long)]
    pub array: Option<String>,
    /// Limit Lévy measure for array checks.
    #[arg(long)]
    pub limit_measure: Option<String>,
    /// Observation epochs.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// One θ vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// θ-grid as JSON, e.g. '{"cartesian":[[-1,1],[0.5]]}'.
    #[arg(long)]
    pub theta_grid: Option<String>,
    /// Row index of the array.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub x_probe: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    #[arg(long)]
    pub bias_allowance: Option<f64>,
    /// Random configurations per verify check.
    #[arg(long)]
    pub cases: Option<usize>,
    /// Monte-Carlo replications inside verify.
    #[arg(long)]
    pub mc_reps: Option<usize>,
    /// Secondary JSON report (empirical CF against the analytic one).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Plot-ready CSV table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Exit nonzero when any assumption check fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint log-characteristic function of a GCID process.
    CfEval(Invocation),
    /// Exact finite-dimensional samples of a GCID process.
    Sample(Invocation),
    /// Simulated M/GI/∞ counts or marked totals.
    SimulateCoverage(Invocation),
    /// Simulated row sums of an ON/OFF array.
    SimulateOnoff(Invocation),
    /// Array assumptions against a limit measure.
    CheckArray(Invocation),
    /// Empirical joint CF of row sums against the limit process, per row size.
    Convergence(Invocation),
    /// The invariant suite; exits nonzero on any failure.
    Verify(Invocation),
}

#[derive(Debug, Args)]
pub struct Invocation {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: Inputs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, inv) = match &cli.command {
        Command::CfEval(i) => ("cf-eval", i),
        Command::Sample(i) => ("sample", i),
        Command::SimulateCoverage(i) => ("simulate-coverage", i),
        Command::SimulateOnoff(i) => ("simulate-onoff", i),
        Command::CheckArray(i) => ("check-array", i),
        Command::Convergence(i) => ("convergence", i),
        Command::Verify(i) => ("verify", i),
    };
    if let Some(t) = inv.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(name, inv) {
        Ok(code) => code,
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {e}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
