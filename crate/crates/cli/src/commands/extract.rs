//! `helion extract-routines` — mining trigger→action pairs.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use helion_core::corpus::read_corpus;
use helion_core::generate::{extract_routines, ExtractionConfig};
use helion_core::ngram::DEFAULT_SENTENCE_LEN;

use super::write_output;

#[derive(Args)]
pub struct ExtractArgs {
    /// Corpus to mine, one event sequence per line.
    #[arg(long)]
    corpus: PathBuf,

    /// Model order used for the per-round retraining.
    #[arg(long, default_value_t = 3)]
    order: usize,

    /// Number of extraction rounds.
    #[arg(long, default_value_t = 200)]
    rounds: usize,

    /// Sentence length sequences are segmented into.
    #[arg(long, default_value_t = DEFAULT_SENTENCE_LEN)]
    sentence_len: usize,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &ExtractArgs, seed: u64) -> anyhow::Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    let cfg = ExtractionConfig {
        order: args.order,
        sentence_len: args.sentence_len,
        rounds: args.rounds,
        seed,
    };
    let report = extract_routines(&corpus, &cfg)?;
    let mut out = String::new();
    for (trigger, action) in &report.routines {
        let _ = writeln!(out, "{}\t{}", trigger.serialize(), action.serialize());
    }
    write_output(args.out.as_deref(), &out)
}
