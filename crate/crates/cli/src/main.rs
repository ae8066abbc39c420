use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use omega_cli::{run, Command, Overrides};

/// Simulate and analyse dimension-varying systems from JSON scenarios.
#[derive(Debug, Parser)]
#[command(name = "omega", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of random signals and matrices.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the integration step.
    #[arg(long)]
    step: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        step: args.step,
    };
    match run(args.command, &args.config, &args.out, overrides) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
