//! `helion train` — model training and persistence.

use std::path::PathBuf;

use clap::Args;
use helion_core::corpus::read_corpus;
use helion_core::ngram::{train_with, TrainConfig, DEFAULT_SENTENCE_LEN};

#[derive(Args)]
pub struct TrainArgs {
    /// Training corpus, one event sequence per line.
    #[arg(long)]
    corpus: PathBuf,

    /// Model order (n).
    #[arg(long)]
    order: usize,

    /// Sentence length sequences are segmented into before counting.
    #[arg(long, default_value_t = DEFAULT_SENTENCE_LEN)]
    sentence_len: usize,

    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: &TrainArgs) -> anyhow::Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    let model = train_with(&corpus, TrainConfig { order: args.order, sentence_len: args.sentence_len })?;
    model.save(&args.out)?;
    Ok(())
}
