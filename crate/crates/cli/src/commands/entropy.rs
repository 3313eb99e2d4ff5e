//! `helion entropy` — k-fold cross-entropy tables.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use helion_core::corpus::read_corpus;
use helion_core::ngram::{kfold_entropy, DEFAULT_SENTENCE_LEN};

use super::write_output;

#[derive(Args)]
pub struct EntropyArgs {
    /// Corpus to evaluate, one event sequence per line.
    #[arg(long)]
    corpus: PathBuf,

    /// Model order: a single value (`3`) or an inclusive range (`1..10`).
    #[arg(long)]
    order: String,

    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 10)]
    k: usize,

    /// Sentence length sequences are segmented into.
    #[arg(long, default_value_t = DEFAULT_SENTENCE_LEN)]
    sentence_len: usize,

    /// Table file to write (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `3` or `1..10` into an inclusive order range.
fn parse_order_spec(spec: &str) -> anyhow::Result<(usize, usize)> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .with_context(|| format!("invalid order `{s}` in `{spec}`"))
    };
    match spec.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                bail!("empty order range `{spec}`");
            }
            Ok((lo, hi))
        }
        None => {
            let n = parse(spec)?;
            Ok((n, n))
        }
    }
}

pub fn run(args: &EntropyArgs, seed: u64) -> anyhow::Result<()> {
    let (lo, hi) = parse_order_spec(&args.order)?;
    let corpus = read_corpus(&args.corpus)?;
    let mut out = String::from("n,fold,H,tokens\n");
    for n in lo..=hi {
        let report = kfold_entropy(&corpus, n, args.k, seed, args.sentence_len)?;
        let mut total_tokens = 0u64;
        for f in &report.folds {
            let _ = writeln!(out, "{n},{},{:.6},{}", f.fold, f.bits_per_token, f.tokens);
            total_tokens += f.tokens;
        }
        let _ = writeln!(out, "{n},mean,{:.6},{total_tokens}", report.mean);
        let _ = writeln!(out, "# perplexity n={n}: {:.6}", report.perplexity);
    }
    write_output(args.out.as_deref(), &out)
}
