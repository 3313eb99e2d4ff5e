//! `helion` — command-line front end for the home-automation modeling
//! toolkit.
//!
//! Subcommands cover the whole pipeline: `ingest` normalizes routine
//! descriptions, `schedule` places them into hourly timelines and emits event
//! corpora, `train`/`entropy` build and evaluate n-gram models, `generate`
//! produces scenarios in four flavors, `extract-routines` mines fresh
//! trigger→action pairs, and `check` replays scenarios against security
//! policies.
//!
//! Exit status: 0 on success (and no violations), 1 when `check` finds
//! violations, 2 on usage or input errors. All randomness derives from the
//! single global `--seed`, so identical invocations produce byte-identical
//! output; environment variables are never consulted.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "helion", version, about = "Model, schedule, generate, and check home-automation event sequences")]
struct Cli {
    /// Root seed; every randomized stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize routine descriptions into event tokens.
    Ingest(commands::ingest::IngestArgs),
    /// Place routines into hourly timelines and emit an event corpus.
    Schedule(commands::schedule::ScheduleArgs),
    /// Train an n-gram model on a corpus and save it.
    Train(commands::train::TrainArgs),
    /// K-fold cross-entropy over one or more model orders.
    Entropy(commands::entropy::EntropyArgs),
    /// Generate scenarios from a trained model.
    Generate(commands::generate::GenerateArgs),
    /// Mine fresh trigger→action pairs from a corpus.
    #[command(name = "extract-routines")]
    ExtractRoutines(commands::extract::ExtractArgs),
    /// Replay scenarios against a policy pack.
    Check(commands::check::CheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(args) => commands::ingest::run(args).map(|()| false),
        Command::Schedule(args) => commands::schedule::run(args, cli.seed).map(|()| false),
        Command::Train(args) => commands::train::run(args).map(|()| false),
        Command::Entropy(args) => commands::entropy::run(args, cli.seed).map(|()| false),
        Command::Generate(args) => commands::generate::run(args, cli.seed).map(|()| false),
        Command::ExtractRoutines(args) => commands::extract::run(args, cli.seed).map(|()| false),
        Command::Check(args) => commands::check::run(args),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
