//! Sequences, corpora, and the vocabulary.
//!
//! A corpus file holds one sequence per line, tokens separated by single
//! spaces; lines starting with `#` (and blank lines) are skipped. The
//! vocabulary is the set of distinct serialized tokens in a corpus plus one
//! reserved `<UNK>` entry for out-of-vocabulary events; indices are assigned
//! in lexicographic order of the serialized form, so construction is
//! deterministic regardless of input order.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::event::EventToken;

/// Reserved vocabulary entry for unknown events. The string is deliberately
/// outside the token grammar, so tokenization can never produce it.
pub const UNKNOWN_TOKEN: &str = "<UNK>";

/// An ordered, non-empty list of event tokens with a provenance note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    tokens: Vec<EventToken>,
    origin: String,
}

impl Sequence {
    pub fn new(tokens: Vec<EventToken>, origin: impl Into<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Corpus("a sequence must contain at least one token".into()));
        }
        Ok(Sequence { tokens, origin: origin.into() })
    }

    pub fn tokens(&self) -> &[EventToken] {
        &self.tokens
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }

    /// One corpus line: serialized tokens joined by single spaces.
    pub fn to_line(&self) -> String {
        self.tokens.iter().map(EventToken::serialize).collect::<Vec<_>>().join(" ")
    }

    /// Parses one corpus line (must contain at least one token).
    pub fn parse_line(line: &str, origin: impl Into<String>) -> Result<Self> {
        let tokens = line
            .split_whitespace()
            .map(EventToken::parse)
            .collect::<Result<Vec<_>>>()?;
        Sequence::new(tokens, origin)
    }
}

/// Distinct serialized tokens of a corpus plus the reserved `<UNK>` entry,
/// indexed in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds the vocabulary of a corpus. Errors on an empty corpus.
    pub fn build(corpus: &[Sequence]) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Corpus("cannot build a vocabulary from an empty corpus".into()));
        }
        let mut set: std::collections::BTreeSet<String> =
            corpus.iter().flat_map(|s| s.tokens().iter().map(EventToken::serialize)).collect();
        set.insert(UNKNOWN_TOKEN.to_string());
        Ok(Self::from_sorted(set.into_iter().collect()))
    }

    /// Rebuilds a vocabulary from an already-sorted token list (model files).
    pub(crate) fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Model("vocabulary block is not sorted and distinct".into()));
        }
        if !tokens.iter().any(|t| t == UNKNOWN_TOKEN) {
            return Err(Error::Model(format!("vocabulary block lacks the reserved {UNKNOWN_TOKEN} entry")));
        }
        Ok(Self::from_sorted(tokens))
    }

    fn from_sorted(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { tokens, index }
    }

    /// Number of entries, including `<UNK>`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Index of `token`, falling back to the `<UNK>` entry.
    pub fn id_or_unknown(&self, token: &str) -> u32 {
        self.id(token).unwrap_or_else(|| self.unknown_id())
    }

    pub fn unknown_id(&self) -> u32 {
        self.index[UNKNOWN_TOKEN]
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Reads a corpus file: one sequence per line, `#` lines and blank lines skipped.
pub fn read_corpus(path: &Path) -> Result<Vec<Sequence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &path.display().to_string())
}

/// Parses corpus text; `source` seeds each sequence's origin (`source:line`).
pub fn parse_corpus(text: &str, source: &str) -> Result<Vec<Sequence>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(Sequence::parse_line(trimmed, format!("{source}:{}", lineno + 1))?);
    }
    Ok(out)
}

/// Renders a corpus as wire text, one sequence per line.
pub fn corpus_to_string(corpus: &[Sequence]) -> String {
    let mut s = String::new();
    for seq in corpus {
        s.push_str(&seq.to_line());
        s.push('\n');
    }
    s
}

pub fn write_corpus(path: &Path, corpus: &[Sequence]) -> Result<()> {
    fs::write(path, corpus_to_string(corpus)).map_err(|e| Error::io(path, e))
}
