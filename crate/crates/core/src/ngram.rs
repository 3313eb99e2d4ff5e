//! Interpolated n-gram language model.
//!
//! Probability estimation uses interpolated absolute discounting with
//! Kneser-Ney continuation counts: the top level works on raw n-gram counts,
//! every lower level on continuation counts (distinct one-token left
//! extensions), and the recursion bottoms out in a uniform distribution over
//! the event space. The event space is the vocabulary (including the unknown
//! token) plus an end-of-sentence marker, so sentence boundaries carry
//! probability mass internally; the public conditional renormalizes the end
//! marker away and therefore sums to one over the vocabulary.
//!
//! Long sequences are segmented into fixed-length sentences before counting
//! (and again before scoring), each padded with `order − 1` begin markers and
//! one end marker.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::corpus::{Sequence, Vocabulary};
use crate::error::{Error, Result};
use crate::event::EventToken;
use crate::seed;

pub const DEFAULT_SENTENCE_LEN: usize = 20;
const MODEL_FORMAT: &str = "helion-ngram/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainConfig {
    pub order: usize,
    pub sentence_len: usize,
}

impl TrainConfig {
    pub fn new(order: usize) -> Self {
        TrainConfig { order, sentence_len: DEFAULT_SENTENCE_LEN }
    }
}

/// Per-context totals used by the estimator: the summed count of all
/// extensions and the number of distinct extensions.
#[derive(Debug, Clone, Copy)]
struct ContextStats {
    total: u64,
    types: u32,
}

type CountTable = HashMap<Vec<u32>, u32>;
type ContextTable = HashMap<Vec<u32>, ContextStats>;

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    sentence_len: usize,
    vocab: Vocabulary,
    /// Per-level absolute discounts, index k−1 for level k.
    discounts: Vec<f64>,
    /// raw[k−1]: raw k-gram counts over padded sentences.
    raw: Vec<CountTable>,
    /// cont[k−1]: continuation counts for level k (used for k < order).
    cont: Vec<CountTable>,
    raw_ctx: ContextTable,
    cont_ctx: Vec<ContextTable>,
}

/// Splits every sequence into sentence-sized chunks, preserving origins.
pub fn segment(corpus: &[Sequence], sentence_len: usize) -> Result<Vec<Sequence>> {
    if sentence_len == 0 {
        return Err(Error::Model("sentence length must be at least 1".into()));
    }
    let mut out = Vec::new();
    for s in corpus {
        for (i, chunk) in s.tokens().chunks(sentence_len).enumerate() {
            out.push(Sequence::new(chunk.to_vec(), format!("{}#{}", s.origin(), i))?);
        }
    }
    Ok(out)
}

/// Trains with the default sentence length.
pub fn train(corpus: &[Sequence], order: usize) -> Result<NgramModel> {
    train_with(corpus, TrainConfig::new(order))
}

pub fn train_with(corpus: &[Sequence], cfg: TrainConfig) -> Result<NgramModel> {
    if cfg.order < 1 {
        return Err(Error::Model("model order must be at least 1".into()));
    }
    if cfg.sentence_len == 0 {
        return Err(Error::Model("sentence length must be at least 1".into()));
    }
    let vocab = Vocabulary::build(corpus)?;
    let order = cfg.order;
    let begin = vocab.len() as u32;
    let end = begin + 1;

    let mut raw: Vec<CountTable> = vec![CountTable::new(); order];
    for s in corpus {
        for chunk in s.tokens().chunks(cfg.sentence_len) {
            let mut padded: Vec<u32> = vec![begin; order - 1];
            padded.extend(chunk.iter().map(|t| vocab.id_or_unknown(&t.serialize())));
            padded.push(end);
            for k in 1..=order {
                let table = &mut raw[k - 1];
                for i in (order - 1)..padded.len() {
                    let gram = &padded[i + 1 - k..=i];
                    match table.get_mut(gram) {
                        Some(c) => *c += 1,
                        None => {
                            table.insert(gram.to_vec(), 1);
                        }
                    }
                }
            }
        }
    }

    let discounts = raw.iter().map(estimate_discount).collect();
    Ok(assemble(order, cfg.sentence_len, vocab, discounts, raw))
}

/// Absolute discount from the count-of-counts formula n1/(n1 + 2·n2), clamped
/// away from 0 and 1; 0.5 when the table has no singletons or doubletons.
fn estimate_discount(table: &CountTable) -> f64 {
    let n1 = table.values().filter(|&&c| c == 1).count() as f64;
    let n2 = table.values().filter(|&&c| c == 2).count() as f64;
    if n1 + 2.0 * n2 == 0.0 {
        0.5
    } else {
        (n1 / (n1 + 2.0 * n2)).clamp(0.05, 0.95)
    }
}

/// Builds the derived tables shared by training and model-file loading.
fn assemble(
    order: usize,
    sentence_len: usize,
    vocab: Vocabulary,
    discounts: Vec<f64>,
    raw: Vec<CountTable>,
) -> NgramModel {
    let mut cont: Vec<CountTable> = vec![CountTable::new(); order];
    for k in 1..order {
        let mut table = CountTable::new();
        for gram in raw[k].keys() {
            // Each distinct (k+1)-gram contributes one left extension.
            match table.get_mut(&gram[1..]) {
                Some(c) => *c += 1,
                None => {
                    table.insert(gram[1..].to_vec(), 1);
                }
            }
        }
        cont[k - 1] = table;
    }

    let aggregate = |table: &CountTable| -> ContextTable {
        let mut agg = ContextTable::new();
        for (gram, &c) in table {
            let ctx = &gram[..gram.len() - 1];
            match agg.get_mut(ctx) {
                Some(s) => {
                    s.total += u64::from(c);
                    s.types += 1;
                }
                None => {
                    agg.insert(ctx.to_vec(), ContextStats { total: u64::from(c), types: 1 });
                }
            }
        }
        agg
    };
    let raw_ctx = aggregate(&raw[order - 1]);
    let cont_ctx = cont.iter().map(aggregate).collect();

    NgramModel { order, sentence_len, vocab, discounts, raw, cont, raw_ctx, cont_ctx }
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sentence_len(&self) -> usize {
        self.sentence_len
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    fn begin_id(&self) -> u32 {
        self.vocab.len() as u32
    }

    fn end_id(&self) -> u32 {
        self.vocab.len() as u32 + 1
    }

    /// Size of the event space: every vocabulary token plus the end marker.
    fn outcomes(&self) -> f64 {
        (self.vocab.len() + 1) as f64
    }

    fn level(&self, k: usize, ctx: &[u32], w: u32) -> f64 {
        if k == 0 {
            return 1.0 / self.outcomes();
        }
        let (table, agg) = if k == self.order {
            (&self.raw[k - 1], &self.raw_ctx)
        } else {
            (&self.cont[k - 1], &self.cont_ctx[k - 1])
        };
        let shorter = if ctx.is_empty() { ctx } else { &ctx[1..] };
        let Some(stats) = agg.get(ctx) else {
            // Unseen context: fall straight through to the next-lower level.
            return self.level(k - 1, shorter, w);
        };
        let mut gram = Vec::with_capacity(k);
        gram.extend_from_slice(ctx);
        gram.push(w);
        let c = f64::from(table.get(gram.as_slice()).copied().unwrap_or(0));
        let d = self.discounts[k - 1];
        let total = stats.total as f64;
        (c - d).max(0.0) / total + d * f64::from(stats.types) / total * self.level(k - 1, shorter, w)
    }

    /// Probability over the full event space (end marker included). `history`
    /// may contain begin-marker ids; only the last `order − 1` entries are
    /// used, and shorter histories enter the recursion at their own level.
    pub(crate) fn p_full(&self, history: &[u32], w: u32) -> f64 {
        let k = self.order.min(history.len() + 1);
        let ctx = &history[history.len() - (k - 1)..];
        self.level(k, ctx, w)
    }

    /// Public conditional over the vocabulary: the end marker's share is
    /// renormalized away, so the distribution sums to one over real tokens.
    pub(crate) fn p_pub(&self, history: &[u32], w: u32) -> f64 {
        let p_end = self.p_full(history, self.end_id());
        self.p_full(history, w) / (1.0 - p_end)
    }

    pub(crate) fn history_ids(&self, history: &[&str]) -> Vec<u32> {
        history.iter().map(|t| self.vocab.id_or_unknown(t)).collect()
    }

    /// Conditional probability of `next` given `history`, both as serialized
    /// tokens. Out-of-vocabulary tokens on either side map to the unknown
    /// token; the result is strictly positive and the distribution over the
    /// vocabulary sums to one.
    pub fn prob(&self, history: &[&str], next: &str) -> f64 {
        let h = self.history_ids(history);
        self.p_pub(&h, self.vocab.id_or_unknown(next))
    }

    /// [`NgramModel::prob`] over structured events.
    pub fn prob_tokens(&self, history: &[EventToken], next: &EventToken) -> f64 {
        let ser: Vec<String> = history.iter().map(EventToken::serialize).collect();
        let refs: Vec<&str> = ser.iter().map(String::as_str).collect();
        self.prob(&refs, &next.serialize())
    }

    /// Total log2 probability of the sequence under the chain rule, scoring
    /// each real token against its begin-padded in-sentence history.
    pub fn sequence_logprob(&self, s: &Sequence) -> f64 {
        let tokens: Vec<String> = s.tokens().iter().map(EventToken::serialize).collect();
        let mut bits = 0.0;
        for chunk in tokens.chunks(self.sentence_len) {
            let mut hist: Vec<u32> = vec![self.begin_id(); self.order - 1];
            for t in chunk {
                let w = self.vocab.id_or_unknown(t);
                bits += self.p_pub(&hist, w).log2();
                hist.push(w);
            }
        }
        bits
    }

    /// Bits per token over held-out data, with the token count used as the
    /// denominator.
    pub fn cross_entropy(&self, test: &[Sequence]) -> Result<(f64, u64)> {
        if test.is_empty() {
            return Err(Error::Model("cannot evaluate on an empty test set".into()));
        }
        let mut bits = 0.0;
        let mut tokens = 0u64;
        for s in test {
            bits += self.sequence_logprob(s);
            tokens += s.len() as u64;
        }
        Ok((-bits / tokens as f64, tokens))
    }

    /// Raw count of a k-gram of real tokens (tests and diagnostics).
    pub fn raw_count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        let Some(ids) = gram.iter().map(|t| self.vocab.id(t)).collect::<Option<Vec<u32>>>() else {
            return 0;
        };
        u64::from(self.raw[gram.len() - 1].get(ids.as_slice()).copied().unwrap_or(0))
    }

    /// Total raw count of all extensions of a top-level context.
    pub fn context_total(&self, ctx: &[&str]) -> u64 {
        if ctx.len() + 1 != self.order {
            return 0;
        }
        let Some(ids) = ctx.iter().map(|t| self.vocab.id(t)).collect::<Option<Vec<u32>>>() else {
            return 0;
        };
        self.raw_ctx.get(ids.as_slice()).map_or(0, |s| s.total)
    }
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FoldEntropy {
    pub fold: usize,
    pub bits_per_token: f64,
    pub tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub order: usize,
    pub folds: Vec<FoldEntropy>,
    /// Token-weighted mean of the per-fold entropies, in bits per token.
    pub mean: f64,
    /// 2 raised to the mean.
    pub perplexity: f64,
}

/// K-fold cross-validated entropy: sentences are shuffled once (derived from
/// the seed alone, so every order sees the same folds), dealt round-robin into
/// k folds, and each fold is scored by a model trained on the other k−1.
pub fn kfold_entropy(
    corpus: &[Sequence],
    order: usize,
    k: usize,
    seed: u64,
    sentence_len: usize,
) -> Result<EntropyReport> {
    if k < 2 {
        return Err(Error::Model(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    let sentences = segment(corpus, sentence_len)?;
    if sentences.len() < k {
        return Err(Error::Model(format!(
            "cannot split {} sentences into {k} folds",
            sentences.len()
        )));
    }

    let mut indices: Vec<usize> = (0..sentences.len()).collect();
    indices.shuffle(&mut seed::stream(seed, "folds"));
    let mut fold_of = vec![0usize; sentences.len()];
    for (pos, &idx) in indices.iter().enumerate() {
        fold_of[idx] = pos % k;
    }

    let cfg = TrainConfig { order, sentence_len };
    let mut folds = Vec::with_capacity(k);
    let mut total_bits = 0.0;
    let mut total_tokens = 0u64;
    for fold in 0..k {
        let mut test = Vec::new();
        let mut training = Vec::new();
        for (i, s) in sentences.iter().enumerate() {
            if fold_of[i] == fold {
                test.push(s.clone());
            } else {
                training.push(s.clone());
            }
        }
        let model = train_with(&training, cfg)?;
        let (h, tokens) = model.cross_entropy(&test)?;
        total_bits += h * tokens as f64;
        total_tokens += tokens;
        folds.push(FoldEntropy { fold, bits_per_token: h, tokens });
    }
    let mean = total_bits / total_tokens as f64;
    Ok(EntropyReport { order, folds, mean, perplexity: mean.exp2() })
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

impl NgramModel {
    /// Renders the model in the versioned text format: a header, the
    /// vocabulary with indices, and every raw count sorted — byte-identical
    /// for identical inputs.
    pub fn to_model_string(&self) -> String {
        let discounts: Vec<String> = self.discounts.iter().map(|d| format!("{d}")).collect();
        let mut out = String::new();
        let _ = writeln!(out, "format: {MODEL_FORMAT}");
        let _ = writeln!(out, "order: {}", self.order);
        let _ = writeln!(out, "vocab_size: {}", self.vocab.len());
        let _ = writeln!(out, "discounts: {}", discounts.join(","));
        out.push_str("[vocab]\n");
        for (i, token) in self.vocab.tokens().iter().enumerate() {
            let _ = writeln!(out, "{i}\t{token}");
        }
        out.push_str("[counts]\n");
        for k in 1..=self.order {
            let mut grams: Vec<(&Vec<u32>, &u32)> = self.raw[k - 1].iter().collect();
            grams.sort();
            for (gram, count) in grams {
                let ctx: Vec<String> = gram[..k - 1].iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{k}\t{}\t{}\t{count}", ctx.join(","), gram[k - 1]);
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_model_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<NgramModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_model(&text)
    }
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Model(format!("model file ends before `{key}` header")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(": "))
        .ok_or_else(|| Error::Model(format!("expected `{key}: ...` header, found `{line}`")))
}

pub fn parse_model(text: &str) -> Result<NgramModel> {
    let mut lines = text.lines();
    let format = header_value(lines.next(), "format")?;
    if format != MODEL_FORMAT {
        return Err(Error::Model(format!("unsupported model format `{format}`")));
    }
    let order: usize = header_value(lines.next(), "order")?
        .parse()
        .map_err(|e| Error::Model(format!("bad order: {e}")))?;
    if order < 1 {
        return Err(Error::Model("model order must be at least 1".into()));
    }
    let vocab_size: usize = header_value(lines.next(), "vocab_size")?
        .parse()
        .map_err(|e| Error::Model(format!("bad vocab_size: {e}")))?;
    let discounts = header_value(lines.next(), "discounts")?
        .split(',')
        .map(|s| s.parse::<f64>().map_err(|e| Error::Model(format!("bad discount `{s}`: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if discounts.len() != order {
        return Err(Error::Model(format!(
            "expected {order} discounts, found {}",
            discounts.len()
        )));
    }
    if discounts.iter().any(|d| !(0.0..1.0).contains(d)) {
        return Err(Error::Model("discounts must lie in [0, 1)".into()));
    }
    if lines.next() != Some("[vocab]") {
        return Err(Error::Model("expected `[vocab]` section after the header".into()));
    }

    let mut tokens = Vec::with_capacity(vocab_size);
    for i in 0..vocab_size {
        let line = lines
            .next()
            .ok_or_else(|| Error::Model("model file ends inside the vocabulary block".into()))?;
        let (idx, token) = line
            .split_once('\t')
            .ok_or_else(|| Error::Model(format!("bad vocabulary line `{line}`")))?;
        if idx != i.to_string() {
            return Err(Error::Model(format!("vocabulary index `{idx}` out of order (expected {i})")));
        }
        tokens.push(token.to_string());
    }
    let vocab = Vocabulary::from_tokens(tokens)?;

    if lines.next() != Some("[counts]") {
        return Err(Error::Model("expected `[counts]` section after the vocabulary".into()));
    }
    let max_id = vocab.len() as u32 + 1; // begin = len, end = len + 1
    let mut raw: Vec<CountTable> = vec![CountTable::new(); order];
    for line in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        let [k, ctx, token, count] = fields.as_slice() else {
            return Err(Error::Model(format!("bad count line `{line}`")));
        };
        let k: usize = k.parse().map_err(|e| Error::Model(format!("bad count order `{k}`: {e}")))?;
        if !(1..=order).contains(&k) {
            return Err(Error::Model(format!("count order {k} outside 1..={order}")));
        }
        let mut gram: Vec<u32> = Vec::with_capacity(k);
        if !ctx.is_empty() {
            for part in ctx.split(',') {
                gram.push(part.parse().map_err(|e| Error::Model(format!("bad context id `{part}`: {e}")))?);
            }
        }
        gram.push(token.parse().map_err(|e| Error::Model(format!("bad token id `{token}`: {e}")))?);
        if gram.len() != k {
            return Err(Error::Model(format!("count line `{line}` has {} ids, expected {k}", gram.len())));
        }
        if gram.iter().any(|&id| id > max_id) {
            return Err(Error::Model(format!("count line `{line}` references an id beyond the event space")));
        }
        let count: u32 = count.parse().map_err(|e| Error::Model(format!("bad count `{count}`: {e}")))?;
        if raw[k - 1].insert(gram, count).is_some() {
            return Err(Error::Model(format!("duplicate count line `{line}`")));
        }
    }
    if raw[order - 1].is_empty() {
        return Err(Error::Model("model file has no top-order counts".into()));
    }
    Ok(assemble(order, DEFAULT_SENTENCE_LEN, vocab, discounts, raw))
}
