//! `helion generate` — scenario generation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use helion_core::generate::{generate, Flavor, GenerationConfig, PickMode};
use helion_core::ngram::NgramModel;
use helion_core::seed;
use helion_core::EventToken;

use super::write_output;

#[derive(Args)]
pub struct GenerateArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,

    /// Seed history: a path to a token file, or the tokens given inline.
    #[arg(long)]
    history: String,

    /// Scenario flavor.
    #[arg(long, default_value = "up", value_parser = parse_flavor)]
    flavor: Flavor,

    /// Number of events to generate per scenario.
    #[arg(long, default_value_t = 10)]
    length: usize,

    /// Number of scenarios to generate.
    #[arg(long, default_value_t = 1)]
    count: usize,

    /// Use greedy argmax for up picks instead of sampling.
    #[arg(long)]
    greedy: bool,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse::<Flavor>().map_err(|e| e.to_string())
}

/// `--history` takes either a file of whitespace-separated tokens or the
/// tokens themselves.
fn resolve_history(spec: &str) -> anyhow::Result<Vec<EventToken>> {
    let text = if Path::new(spec).is_file() {
        std::fs::read_to_string(spec).with_context(|| format!("cannot read history file {spec}"))?
    } else {
        spec.to_string()
    };
    let tokens: Vec<EventToken> = text
        .split_whitespace()
        .map(EventToken::parse)
        .collect::<Result<_, _>>()
        .context("invalid history token")?;
    if tokens.is_empty() {
        bail!("history is empty");
    }
    Ok(tokens)
}

pub fn run(args: &GenerateArgs, seed_value: u64) -> anyhow::Result<()> {
    let model = NgramModel::load(&args.model)?;
    let history = resolve_history(&args.history)?;
    let mode = if args.greedy { PickMode::Greedy } else { PickMode::Sample };
    let mut out = String::new();
    for i in 0..args.count {
        let mut stream = seed::stream_indexed(seed_value, "generate", i as u64);
        let scenario_seed = seed::sub_seed(&mut stream);
        let cfg = GenerationConfig { length: args.length, flavor: args.flavor, mode, seed: scenario_seed };
        let scenario = generate(&model, &history, &cfg)?;
        let _ = writeln!(out, "{}", scenario.to_line());
        let _ = writeln!(
            out,
            "# scenario={i} flavor={} seed={} marks={}",
            scenario.flavor(),
            scenario.seed(),
            scenario.mark_string()
        );
    }
    write_output(args.out.as_deref(), &out)
}
