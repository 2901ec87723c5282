//! Command-line front end for the photonic-crystal cavity toolkit.
//!
//! Exit codes: 0 success, 1 config/input error, 2 design-rule failure,
//! 3 solver divergence, 4 fit non-convergence.

mod commands;
mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Ctx;

#[derive(Parser)]
#[command(
    name = "phc-lab",
    version,
    about = "Design, simulate, and analyze visible-wavelength photonic-crystal cavities",
    long_about = "Design, simulate, and analyze visible-wavelength photonic-crystal cavities \
in thin-film diamond.\n\nAll numeric inputs come from a JSON config file (--config); each \
subcommand's --help lists its config fields with units.\n\nExit codes: 0 success, 1 config \
or input error, 2 design-rule failure, 3 solver divergence, 4 fit non-convergence.\n\n\
PHC_LAB_THREADS caps the worker-thread count of sample-parallel commands."
)]
struct Cli {
    /// JSON config file for the subcommand.
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "dir", default_value = ".")]
    out: PathBuf,

    /// Override the config's RNG seed.
    #[arg(long, global = true, value_name = "u64")]
    seed: Option<u64>,

    /// Allow overwriting existing output files.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a cavity hole layout and run the design-rule check.
    #[command(long_about = commands::design::CONFIG_HELP)]
    Design,
    /// Run the 2D effective-index FDTD solver on a layout or eps map.
    #[command(long_about = commands::simulate::CONFIG_HELP)]
    Simulate,
    /// Compute TE band structures by plane-wave expansion.
    #[command(long_about = commands::bands::CONFIG_HELP)]
    Bands,
    /// Fit a spectrum, reflection dip, lifetime, or g2 histogram.
    #[command(long_about = commands::fit::CONFIG_HELP)]
    Fit,
    /// Cavity-QED figures of merit: Purcell, cooperativity, coupling.
    #[command(long_about = commands::cqed::CONFIG_HELP)]
    Cqed,
    /// Monte Carlo fabrication-tolerance and yield study.
    #[command(name = "yield", long_about = commands::yields::CONFIG_HELP)]
    Yield,
    /// Rank results against the embedded literature comparison table.
    #[command(long_about = commands::report::CONFIG_HELP)]
    Report,
    /// Print the embedded literature comparison table as CSV.
    Table,
}

fn main() {
    let cli = Cli::parse();
    let ctx = Ctx {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        force: cli.force,
    };
    let result = match cli.command {
        Command::Design => commands::design::run(&ctx),
        Command::Simulate => commands::simulate::run(&ctx),
        Command::Bands => commands::bands::run(&ctx),
        Command::Fit => commands::fit::run(&ctx),
        Command::Cqed => commands::cqed::run(&ctx),
        Command::Yield => commands::yields::run(&ctx),
        Command::Report => commands::report::run(&ctx),
        Command::Table => {
            print!("{}", table::table_csv());
            Ok(())
        }
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}
