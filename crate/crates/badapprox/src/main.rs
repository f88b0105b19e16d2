//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use badapprox::config::RunConfig;
use badapprox::run::{run_command, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "badapprox", about = "Weighted inhomogeneous approximation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// RNG seed; identical (config, seed) reruns are byte-identical.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; recorded for reproducibility (commands run
    /// sequentially so results never depend on scheduling).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory for trace.ndjson, report.json, curves.csv.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full game and certify the outcome.
    Play,
    /// Evaluate approximation quality at a point.
    Eval,
    /// Curve experiments: hit rates and E-set measure estimates.
    Nullity,
    /// Check a planted linear system against its transposed system.
    Transfer,
    /// Compute and dump the constants ledger.
    Constants,
}

fn main() {
    let cli = Cli::parse();
    let cfg = match RunConfig::from_path(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(EXIT_CONFIG);
        }
    };
    let name = match cli.command {
        Command::Play => "play",
        Command::Eval => "eval",
        Command::Nullity => "nullity",
        Command::Transfer => "transfer",
        Command::Constants => "constants",
    };
    std::process::exit(run_command(name, &cfg, cli.seed, &cli.out));
}
