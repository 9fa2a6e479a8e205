//! `hawkbias`: simulate, fit, and audit mutually exciting group-pair
//! processes and the recommender feedback loops built on them.
//!
//! Exit codes: 0 success (including detection outcomes such as a
//! supercritical report), 1 usage or config error, 2 I/O error, 3 numerical
//! failure.

mod commands;
mod config;
mod error;
mod manifest;
mod output;
mod replicate;

use clap::Parser;

use commands::{analyze, estimate, netsim, reproduce, simulate};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hawkbias",
    version,
    about = "Group-pair self-exciting event simulation, estimation, and bias audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Simulate an event log from process parameters.
    Simulate(simulate::SimulateArgs),
    /// Fit per-window diagonal excitation models to an event log.
    Estimate(estimate::EstimateArgs),
    /// Stability, stationary rates, and rate-ODE trajectories.
    Analyze(analyze::AnalyzeArgs),
    /// Network simulation with a link recommender in the loop.
    Netsim(netsim::NetsimArgs),
    /// Packaged experiments with embedded configs and pinned seeds.
    Reproduce(reproduce::ReproduceArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits 2 by default; map real parse errors to the usage
            // code and keep --help/--version at 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Estimate(args) => estimate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Netsim(args) => netsim::run(args),
        Command::Reproduce(args) => reproduce::run(args),
    }
}
