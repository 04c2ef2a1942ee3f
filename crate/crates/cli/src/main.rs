#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod instance;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Sticky-particle simulations and the checks built on them.
///
/// Exit status: 0 when every check passes, 1 when a verification fails,
/// 2 on invalid input or usage.
#[derive(Debug, Parser)]
#[command(name = "sticky", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Directory receiving the CSV tables and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Absolute comparison tolerance (overrides the instance file).
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
    /// Relative comparison tolerance (overrides the instance file).
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the event-driven simulation and export events, segments and trajectories.
    Simulate(commands::SimulateArgs),
    /// Compare variational partitions with simulated ones at given times.
    Gvp(commands::GvpArgs),
    /// Weak-form residuals of the gas systems on a time window.
    Gas(commands::GasArgs),
    /// Random admissible instances through every verification suite.
    Fuzz(commands::FuzzArgs),
    /// Conditional-expectation identities and right-derivative checks.
    Dermoune(commands::DermouneArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate_cmd(&cli.global, args),
        Command::Gvp(args) => commands::gvp(&cli.global, args),
        Command::Gas(args) => commands::gas(&cli.global, args),
        Command::Fuzz(args) => commands::fuzz(&cli.global, args),
        Command::Dermoune(args) => commands::dermoune(&cli.global, args),
    };
    match result {
        Ok(commands::Verdict::Pass) => ExitCode::SUCCESS,
        Ok(commands::Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
