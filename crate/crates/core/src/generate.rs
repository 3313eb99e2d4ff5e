//! Scenario generation.
//!
//! A trained model doubles as a sequence generator: *up* picks follow the
//! learned conditional distribution (sampled, or greedy argmax), *down* picks
//! deliberately take the least probable next event, and the two hybrid flavors
//! mix 1–3 minority picks into every 10-event window. Reserved tokens (the
//! unknown token and the sentence markers) are never generated, and generation
//! always emits the requested number of events.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sequence;
use crate::error::{Error, Result};
use crate::event::EventToken;
use crate::ngram::{self, NgramModel, TrainConfig, DEFAULT_SENTENCE_LEN};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PickDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PickMode {
    #[default]
    Sample,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Up,
    Down,
    UpDown,
    DownUp,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [Flavor::Up, Flavor::Down, Flavor::UpDown, Flavor::DownUp];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Up => "up",
            Flavor::Down => "down",
            Flavor::UpDown => "up-down",
            Flavor::DownUp => "down-up",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" => Ok(Flavor::Up),
            "down" => Ok(Flavor::Down),
            "up-down" => Ok(Flavor::UpDown),
            "down-up" => Ok(Flavor::DownUp),
            other => Err(Error::Generation(format!(
                "unknown flavor `{other}` (expected up, down, up-down, or down-up)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationConfig {
    /// Number of events to generate (not counting the history).
    pub length: usize,
    pub flavor: Flavor,
    /// How up picks are made; down picks are always the deterministic argmin.
    pub mode: PickMode,
    pub seed: u64,
}

/// A generated event sequence: the seed history, the generated continuation,
/// and the per-event pick direction each generated event was chosen with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    history: Vec<EventToken>,
    generated: Vec<EventToken>,
    marks: Vec<PickDirection>,
    flavor: Flavor,
    seed: u64,
}

impl Scenario {
    pub fn history(&self) -> &[EventToken] {
        &self.history
    }

    pub fn generated(&self) -> &[EventToken] {
        &self.generated
    }

    pub fn marks(&self) -> &[PickDirection] {
        &self.marks
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// History followed by generated events.
    pub fn events(&self) -> impl Iterator<Item = &EventToken> {
        self.history.iter().chain(self.generated.iter())
    }

    /// One character per event: `h` for history, `u`/`d` for generated picks.
    pub fn mark_string(&self) -> String {
        let mut s = "h".repeat(self.history.len());
        s.extend(self.marks.iter().map(|m| match m {
            PickDirection::Up => 'u',
            PickDirection::Down => 'd',
        }));
        s
    }

    /// The full event sequence in corpus wire format.
    pub fn to_line(&self) -> String {
        self.events().map(EventToken::serialize).collect::<Vec<_>>().join(" ")
    }
}

/// Draws `k` distinct positions out of `0..len` (partial Fisher-Yates).
fn draw_positions(len: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(k <= len);
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..k {
        let j = rng.random_range(i..len);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Plans the pick direction of every generated event before any event is
/// drawn. Hybrid flavors work over disjoint 10-event windows: a full window
/// receives 1–3 minority picks (count drawn uniformly), a trailing window of
/// w events receives max(1, round(w/10 × 2)) capped to w.
fn plan_marks(length: usize, flavor: Flavor, rng: &mut ChaCha8Rng) -> Vec<PickDirection> {
    let (majority, minority) = match flavor {
        Flavor::Up => return vec![PickDirection::Up; length],
        Flavor::Down => return vec![PickDirection::Down; length],
        Flavor::UpDown => (PickDirection::Up, PickDirection::Down),
        Flavor::DownUp => (PickDirection::Down, PickDirection::Up),
    };
    let mut marks = vec![majority; length];
    let mut start = 0;
    while start < length {
        let w = (length - start).min(10);
        let k = if w == 10 {
            rng.random_range(1..=3)
        } else {
            (((w as f64) / 10.0 * 2.0).round() as usize).clamp(1, w)
        };
        for pos in draw_positions(w, k, rng) {
            marks[start + pos] = minority;
        }
        start += w;
    }
    marks
}

/// All ids a generator may pick: the vocabulary without the unknown token.
fn candidate_ids(model: &NgramModel) -> Result<Vec<u32>> {
    let unk = model.vocabulary().unknown_id();
    let ids: Vec<u32> = (0..model.vocabulary().len() as u32).filter(|&i| i != unk).collect();
    if ids.is_empty() {
        return Err(Error::Generation("vocabulary has no generatable tokens".into()));
    }
    Ok(ids)
}

fn pick_id(
    model: &NgramModel,
    history: &[u32],
    pick: PickDirection,
    mode: PickMode,
    rng: &mut ChaCha8Rng,
) -> Result<u32> {
    let candidates = candidate_ids(model)?;
    // The end-marker renormalization is a constant per history, so ranking and
    // proportional sampling can work on the full-space probabilities directly.
    let probs: Vec<f64> = candidates.iter().map(|&id| model.p_full(history, id)).collect();
    let chosen = match (pick, mode) {
        (PickDirection::Down, _) => argscan(&candidates, &probs, |p, best| p < best),
        (PickDirection::Up, PickMode::Greedy) => argscan(&candidates, &probs, |p, best| p > best),
        (PickDirection::Up, PickMode::Sample) => {
            let total: f64 = probs.iter().sum();
            let x = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = *candidates.last().expect("candidates are non-empty");
            for (&id, &p) in candidates.iter().zip(&probs) {
                acc += p;
                if x < acc {
                    chosen = id;
                    break;
                }
            }
            chosen
        }
    };
    Ok(chosen)
}

/// Scans candidates in ascending id order, keeping the first best; ties
/// therefore resolve to the lexicographically smallest token.
fn argscan(candidates: &[u32], probs: &[f64], better: impl Fn(f64, f64) -> bool) -> u32 {
    let mut best_id = candidates[0];
    let mut best_p = probs[0];
    for (&id, &p) in candidates.iter().zip(probs).skip(1) {
        if better(p, best_p) {
            best_id = id;
            best_p = p;
        }
    }
    best_id
}

fn token_for(model: &NgramModel, id: u32) -> Result<EventToken> {
    EventToken::parse(model.vocabulary().token(id))
        .map_err(|e| Error::Generation(format!("vocabulary entry is not a valid event token: {e}")))
}

/// Picks the next event for a running history. Up/sample draws from the
/// conditional distribution, up/greedy takes the argmax, down takes the argmin
/// over the real vocabulary; ties break toward the lexicographically smallest
/// token.
pub fn next_event(
    model: &NgramModel,
    history: &[EventToken],
    pick: PickDirection,
    mode: PickMode,
    rng: &mut ChaCha8Rng,
) -> Result<EventToken> {
    let ser: Vec<String> = history.iter().map(EventToken::serialize).collect();
    let refs: Vec<&str> = ser.iter().map(String::as_str).collect();
    let ids = model.history_ids(&refs);
    token_for(model, pick_id(model, &ids, pick, mode, rng)?)
}

/// Generates a scenario: marks are planned first, then each event is drawn
/// with the running history (each prediction becomes part of the history for
/// the next). Deterministic in (model, history, cfg).
pub fn generate(model: &NgramModel, history: &[EventToken], cfg: &GenerationConfig) -> Result<Scenario> {
    if cfg.length == 0 {
        return Err(Error::Generation("generation length must be at least 1".into()));
    }
    let mut rng = seed::stream(cfg.seed, "generate");
    let marks = plan_marks(cfg.length, cfg.flavor, &mut rng);
    let mut ids: Vec<u32> = history
        .iter()
        .map(|t| model.vocabulary().id_or_unknown(&t.serialize()))
        .collect();
    let mut generated = Vec::with_capacity(cfg.length);
    for &mark in &marks {
        let id = pick_id(model, &ids, mark, cfg.mode, &mut rng)?;
        generated.push(token_for(model, id)?);
        ids.push(id);
    }
    Ok(Scenario { history: history.to_vec(), generated, marks, flavor: cfg.flavor, seed: cfg.seed })
}

// ---------------------------------------------------------------------------
// Routine extraction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionConfig {
    pub order: usize,
    pub sentence_len: usize,
    pub rounds: usize,
    pub seed: u64,
}

impl ExtractionConfig {
    pub fn new(order: usize, rounds: usize, seed: u64) -> Self {
        ExtractionConfig { order, sentence_len: DEFAULT_SENTENCE_LEN, rounds, seed }
    }
}

/// Per-round log entry (the sampled history length is always odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionRound {
    pub round: usize,
    pub history_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    /// Unique trigger→action pairs in first-discovery order.
    pub routines: Vec<(EventToken, EventToken)>,
    pub rounds: Vec<ExtractionRound>,
}

/// Mines fresh trigger→action pairs from a corpus. Each round holds out ~10%
/// of the sentences, trains on the rest, seeds generation with a random
/// odd-length subsequence of a held-out sentence, generates three events, and
/// keeps the second and third as a candidate routine; pairs are deduplicated
/// across rounds by their serialized form.
pub fn extract_routines(corpus: &[Sequence], cfg: &ExtractionConfig) -> Result<ExtractionReport> {
    if cfg.rounds == 0 {
        return Err(Error::Generation("extraction needs at least one round".into()));
    }
    let sentences = ngram::segment(corpus, cfg.sentence_len)?;
    if sentences.len() < 2 {
        return Err(Error::Generation(format!(
            "corpus of {} sentence(s) is too small for a 90/10 split",
            sentences.len()
        )));
    }

    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut routines = Vec::new();
    let mut rounds = Vec::with_capacity(cfg.rounds);
    for round in 0..cfg.rounds {
        let mut rng = seed::stream_indexed(cfg.seed, "extract", round as u64);
        let mut indices: Vec<usize> = (0..sentences.len()).collect();
        indices.shuffle(&mut rng);
        let test_n = ((sentences.len() + 5) / 10).max(1);
        let (test_idx, train_idx) = indices.split_at(test_n);
        let training: Vec<Sequence> = train_idx.iter().map(|&i| sentences[i].clone()).collect();
        let model = ngram::train_with(
            &training,
            TrainConfig { order: cfg.order, sentence_len: cfg.sentence_len },
        )?;

        let held_out = &sentences[test_idx[rng.random_range(0..test_idx.len())]];
        let odd_lengths: Vec<usize> =
            [1, 3, 5, 7, 9].into_iter().filter(|&l| l <= held_out.len()).collect();
        let history_len = odd_lengths[rng.random_range(0..odd_lengths.len())];
        let start = rng.random_range(0..=held_out.len() - history_len);
        let history = &held_out.tokens()[start..start + history_len];

        let mut ids: Vec<u32> = history
            .iter()
            .map(|t| model.vocabulary().id_or_unknown(&t.serialize()))
            .collect();
        let mut events = Vec::with_capacity(3);
        for _ in 0..3 {
            let id = pick_id(&model, &ids, PickDirection::Up, PickMode::Sample, &mut rng)?;
            events.push(token_for(&model, id)?);
            ids.push(id);
        }
        // The second and third generated events form the fresh routine.
        let pair = (events[1].clone(), events[2].clone());
        if seen.insert((pair.0.serialize(), pair.1.serialize())) {
            routines.push(pair);
        }
        rounds.push(ExtractionRound { round, history_len });
    }
    Ok(ExtractionReport { routines, rounds })
}
