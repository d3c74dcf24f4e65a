//! `hexflood`: fetch elevations, run runoff scenarios, report and render
//! depth fields.
//!
//! Exit codes: 0 ok, 2 usage or config, 3 network, 4 data, 5 I/O.

mod commands;
mod config;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use commands::{FetchDemArgs, RenderArgs, ReportArgs, SimulateArgs};

#[derive(Debug, Parser)]
#[command(
    name = "hexflood",
    version,
    about = "Hex-grid cellular-automata runoff and flood simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch an elevation raster from the elevation service (cached)
    FetchDem(FetchDemArgs),
    /// Run a scenario file and write snapshots, report and image
    Simulate(SimulateArgs),
    /// Print statistics and flood zones of a depth CSV
    Report(ReportArgs),
    /// Render a depth CSV as a PPM image
    Render(RenderArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::FetchDem(args) => commands::fetch_dem(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Report(args) => commands::report(args),
        Command::Render(args) => commands::render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            error!("{f}");
            eprintln!("hexflood: {f}");
            f.exit_code()
        }
    }
}
