//! Experiment runner for associative memories with dream-refined couplings.
//!
//! Every subcommand resolves its parameters with the precedence
//! flag > config file > built-in default, writes a manifest before any result,
//! and derives all randomness from one master seed, so a fixed seed makes the
//! result files bit-identical across runs of the same build.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

use commands::{basins, capacity, dream, fields, mc, phase, Ctx};
use config::{resolve, FileConfig};

#[derive(Parser)]
#[command(name = "hopnet", version, about)]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent grid points (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory receiving result files and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Flat KEY=VALUE file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved parameter map and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical storage capacity across reinforcement times, with growth fit.
    Capacity(capacity::CapacityArgs),
    /// Retrieval phase boundaries over the load-temperature plane.
    PhaseDiagram(phase::PhaseArgs),
    /// Finite-temperature retrieval curves from heat-bath simulation.
    Mc(mc::McArgs),
    /// Stationary local-field histograms at zero temperature.
    Fields(fields::FieldsArgs),
    /// Attraction-basin width under initial corruption.
    Basins(basins::BasinsArgs),
    /// Reinforcement iteration traces and critical-strength estimates.
    Dream(dream::DreamArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    let seed = resolve(cli.seed, &file, "seed", 42)?;
    let jobs = match cli.jobs {
        Some(j) => Some(j),
        None => file
            .get("jobs")
            .map(|raw| {
                raw.parse::<usize>()
                    .map_err(|e| anyhow::anyhow!("config key jobs = {raw:?}: {e}"))
            })
            .transpose()?,
    };
    let out_dir = match cli.out_dir {
        Some(dir) => dir,
        None => PathBuf::from(file.get("out-dir").unwrap_or(".")),
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()?;
    }
    let ctx = Ctx {
        seed,
        out_dir,
        dry_run: cli.dry_run,
        jobs,
        file,
    };
    match &cli.command {
        Command::Capacity(args) => capacity::run(&ctx, args),
        Command::PhaseDiagram(args) => phase::run(&ctx, args),
        Command::Mc(args) => mc::run(&ctx, args),
        Command::Fields(args) => fields::run(&ctx, args),
        Command::Basins(args) => basins::run(&ctx, args),
        Command::Dream(args) => dream::run(&ctx, args),
    }
}
