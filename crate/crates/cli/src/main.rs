//! `gapmeet`: rendezvous detection during trajectory gaps.

mod commands;
mod error;
mod params;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bench, detect, eval, pair, synth};

#[derive(Parser, Debug)]
#[command(name = "gapmeet", version, about = "Detect possible rendezvous nodes of objects during trajectory gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect rendezvous nodes; writes GeoJSON, metrics and run.json
    Detect(detect::DetectArgs),
    /// Generate a synthetic dataset with staged meets
    Synth(synth::SynthArgs),
    /// Score detectors on a dataset against its truth labels
    Eval(eval::EvalArgs),
    /// Dump trajectory gaps and gap pairs
    Pair(pair::PairArgs),
    /// Run the synthetic parameter matrix
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => detect::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Pair(a) => pair::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error::exit_code(&e))
        }
    }
}
