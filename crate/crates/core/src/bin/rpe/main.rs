mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Robust phase estimation: calibration, noise sweeps, plots and self-checks.
#[derive(Debug, Parser)]
#[command(name = "rpe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Estimate the gate angle once and print it with its bound.
    Calibrate,
    /// Failure rate against detector threshold.
    SweepDetection,
    /// Failure rate over preparation time and samples per generation.
    SweepPrep,
    /// Failure rate against phase-damping intensity.
    SweepDamping,
    /// Estimate histograms for damping intensities and detector thresholds.
    Histogram,
    /// Brute-force cross-checks of the simulator, Poisson CDF and estimator.
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// TOML config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for tables and plots.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    plot: bool,
    /// Overrides trials per point (or calibration trials).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Treat degenerate counts as an error instead of flagging them.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for sweeps; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Uniform tolerance for every oracle.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command, &cli.opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
