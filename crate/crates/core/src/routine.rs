//! Trigger-action routines and their ingestion.
//!
//! Raw routine files describe each routine with free-form device/attribute/
//! value specs plus execution indicators (time range, day range, frequency).
//! Ingestion normalizes identifiers, resolves synonyms, abstracts continuous
//! values into range labels, and collapses simultaneous events into a single
//! conjunction token, yielding [`Routine`] values whose triggers/actions are
//! wire-format [`EventToken`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{AtomicEvent, EventToken};

/// Coarse time-of-day window reported by a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRange {
    EarlyMorning,
    Morning,
    Noon,
    Afternoon,
    Evening,
    Night,
    LateNight,
    Anytime,
    NotSure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayRange {
    Weekdays,
    Weekends,
    Anytime,
    NotSure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    ManyPerDay,
    FewPerDay,
    FewPerWeek,
    FewPerMonth,
    NotSure,
}

fn default_time_range() -> TimeRange {
    TimeRange::NotSure
}
fn default_day_range() -> DayRange {
    DayRange::NotSure
}
fn default_frequency() -> Frequency {
    Frequency::NotSure
}

/// The three execution indicators; omitted fields read as NOT_SURE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionIndicators {
    #[serde(default = "default_time_range")]
    pub time_range: TimeRange,
    #[serde(default = "default_day_range")]
    pub day_range: DayRange,
    #[serde(default = "default_frequency")]
    pub frequency: Frequency,
}

impl Default for ExecutionIndicators {
    fn default() -> Self {
        ExecutionIndicators {
            time_range: TimeRange::NotSure,
            day_range: DayRange::NotSure,
            frequency: Frequency::NotSure,
        }
    }
}

/// A normalized trigger-action routine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Routine {
    id: String,
    triggers: Vec<EventToken>,
    actions: Vec<EventToken>,
    #[serde(default)]
    indicators: ExecutionIndicators,
    #[serde(default)]
    specific_time: Option<u8>,
}

impl Routine {
    pub fn new(
        id: impl Into<String>,
        triggers: Vec<EventToken>,
        actions: Vec<EventToken>,
        indicators: ExecutionIndicators,
        specific_time: Option<u8>,
    ) -> Result<Self> {
        let r = Routine { id: id.into(), triggers, actions, indicators, specific_time };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Routine("routine id must be non-empty".into()));
        }
        if self.triggers.is_empty() || self.actions.is_empty() {
            return Err(Error::Routine(format!(
                "routine `{}` needs at least one trigger and one action",
                self.id
            )));
        }
        if let Some(h) = self.specific_time {
            if h > 23 {
                return Err(Error::Routine(format!(
                    "routine `{}`: specific_time {h} is outside 0..=23",
                    self.id
                )));
            }
        }
        let trigger_set: BTreeSet<String> = self.triggers.iter().map(EventToken::serialize).collect();
        for a in &self.actions {
            if trigger_set.contains(&a.serialize()) {
                return Err(Error::Routine(format!(
                    "routine `{}`: token `{}` appears as both trigger and action",
                    self.id,
                    a.serialize()
                )));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn triggers(&self) -> &[EventToken] {
        &self.triggers
    }

    pub fn actions(&self) -> &[EventToken] {
        &self.actions
    }

    pub fn indicators(&self) -> &ExecutionIndicators {
        &self.indicators
    }

    pub fn specific_time(&self) -> Option<u8> {
        self.specific_time
    }

    /// Tokens emitted by one instance of this routine: triggers, then actions,
    /// in declared order.
    pub fn instance_tokens(&self) -> impl Iterator<Item = &EventToken> {
        self.triggers.iter().chain(self.actions.iter())
    }
}

// ---------------------------------------------------------------------------
// Raw routine files
// ---------------------------------------------------------------------------

/// A raw value before normalization: either free text or a continuous number.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for RawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawValue::Number(n) => write!(f, "{n}"),
            RawValue::Text(t) => f.write_str(t),
        }
    }
}

/// One raw event spec from a routine file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct RawEventSpec {
    #[serde(default)]
    pub device: Option<String>,
    pub attribute: String,
    pub value: RawValue,
}

/// One record of the raw routine file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct RawRoutine {
    pub id: String,
    pub triggers: Vec<RawEventSpec>,
    pub actions: Vec<RawEventSpec>,
    #[serde(default)]
    pub indicators: ExecutionIndicators,
    #[serde(default)]
    pub specific_time: Option<u8>,
}

/// Reads a raw routine file (a JSON array of records). Schema violations are
/// reported with the offending record numbers.
pub fn read_raw_routines(path: &Path) -> Result<Vec<RawRoutine>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_raw_routines(&text)
}

pub fn parse_raw_routines(text: &str) -> Result<Vec<RawRoutine>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Routine(format!("routine file is not valid JSON: {e}")))?;
    let items = value
        .as_array()
        .ok_or_else(|| Error::Routine("routine file must be a JSON array of records".into()))?;
    let mut out = Vec::with_capacity(items.len());
    let mut bad = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match serde_json::from_value::<RawRoutine>(item.clone()) {
            Ok(r) => out.push(r),
            Err(e) => bad.push(format!("record {}: {e}", i + 1)),
        }
    }
    if !bad.is_empty() {
        return Err(Error::Routine(format!("schema violations: {}", bad.join("; "))));
    }
    Ok(out)
}

/// Reads a normalized routine file (the format `ingest` writes).
pub fn read_routines(path: &Path) -> Result<Vec<Routine>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let routines: Vec<Routine> =
        serde_json::from_str(&text).map_err(|e| Error::Routine(format!("normalized routine file: {e}")))?;
    for r in &routines {
        r.validate()?;
    }
    Ok(routines)
}

/// Writes routines in the normalized format (pretty JSON, trailing newline).
pub fn write_routines(path: &Path, routines: &[Routine]) -> Result<()> {
    fs::write(path, routines_to_string(routines)).map_err(|e| Error::io(path, e))
}

pub fn routines_to_string(routines: &[Routine]) -> String {
    let mut s = serde_json::to_string_pretty(routines).expect("routine serialization cannot fail");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Normalization maps
// ---------------------------------------------------------------------------

/// Phrase-to-canonical-identifier substitutions applied before normalization
/// ("captured" vs. "detected" and similar paraphrases). Keys match
/// case-insensitively against whole segments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    map: BTreeMap<String, String>,
}

impl SynonymTable {
    pub fn from_map(map: BTreeMap<String, String>) -> Self {
        let map = map.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        SynonymTable { map }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: BTreeMap<String, String> =
            serde_json::from_str(&text).map_err(|e| Error::Routine(format!("synonym table: {e}")))?;
        Ok(Self::from_map(map))
    }

    pub fn resolve<'a>(&'a self, s: &'a str) -> &'a str {
        self.map.get(&s.to_lowercase()).map(String::as_str).unwrap_or(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawAbstractionEntry {
    thresholds: Vec<f64>,
    labels: Vec<String>,
    #[serde(default)]
    min: Option<f64>,
    #[serde(default)]
    max: Option<f64>,
}

/// One attribute's continuous-to-discrete mapping: `labels[i]` covers values
/// below `thresholds[i]`; the final label covers everything at or above the
/// last threshold. Optional bounds make values outside them an error.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionEntry {
    thresholds: Vec<f64>,
    labels: Vec<String>,
    min: Option<f64>,
    max: Option<f64>,
}

impl AbstractionEntry {
    pub fn new(thresholds: Vec<f64>, labels: Vec<String>, min: Option<f64>, max: Option<f64>) -> Result<Self> {
        if labels.len() != thresholds.len() + 1 {
            return Err(Error::Routine(format!(
                "abstraction entry needs as many labels as thresholds plus one (got {} labels, {} thresholds)",
                labels.len(),
                thresholds.len()
            )));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Routine("abstraction thresholds must be strictly increasing".into()));
        }
        Ok(AbstractionEntry { thresholds, labels, min, max })
    }

    fn label_for(&self, value: f64) -> Option<&str> {
        if self.min.is_some_and(|m| value < m) || self.max.is_some_and(|m| value >= m) {
            return None;
        }
        let idx = self.thresholds.iter().position(|t| value < *t).unwrap_or(self.thresholds.len());
        Some(&self.labels[idx])
    }
}

/// Attribute-keyed abstraction map for continuous values.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionMap {
    entries: BTreeMap<String, AbstractionEntry>,
}

impl AbstractionMap {
    /// The built-in map: a three-way low/medium/high split for `temperature`
    /// (below 70, 70 to below 80, 80 and up).
    pub fn default_map() -> Self {
        let entry = AbstractionEntry::new(
            vec![70.0, 80.0],
            vec!["LOW".into(), "MEDIUM".into(), "HIGH".into()],
            None,
            None,
        )
        .expect("built-in abstraction entry is valid");
        let mut entries = BTreeMap::new();
        entries.insert("temperature".to_string(), entry);
        AbstractionMap { entries }
    }

    pub fn empty() -> Self {
        AbstractionMap { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, attribute: impl Into<String>, entry: AbstractionEntry) {
        self.entries.insert(attribute.into(), entry);
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, RawAbstractionEntry> =
            serde_json::from_str(&text).map_err(|e| Error::Routine(format!("abstraction map: {e}")))?;
        let mut entries = BTreeMap::new();
        for (attr, e) in raw {
            entries.insert(attr, AbstractionEntry::new(e.thresholds, e.labels, e.min, e.max)?);
        }
        Ok(AbstractionMap { entries })
    }

    /// Resolves a continuous value to its range label.
    pub fn label_for(&self, attribute: &str, value: f64) -> Result<&str> {
        let entry = self.entries.get(attribute).ok_or_else(|| {
            Error::Routine(format!("unknown attribute `{attribute}`: no abstraction ranges declared for it"))
        })?;
        entry.label_for(value).ok_or_else(|| {
            Error::Routine(format!("value {value} for attribute `{attribute}` is outside all declared ranges"))
        })
    }
}

/// Declares which device/attribute pairs (and home-level attributes, under the
/// empty device key) exist; ingest validation is limited to what it declares.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceMap {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl DeviceMap {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: BTreeMap<String, BTreeSet<String>> =
            serde_json::from_str(&text).map_err(|e| Error::Routine(format!("device map: {e}")))?;
        Ok(DeviceMap { map })
    }

    pub fn declares(&self, device: Option<&str>, attribute: &str) -> bool {
        self.map.get(device.unwrap_or("")).is_some_and(|attrs| attrs.contains(attribute))
    }
}

// ---------------------------------------------------------------------------
// Normalization and tokenization
// ---------------------------------------------------------------------------

fn squash_whitespace(s: &str, joiner: char) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(&joiner.to_string())
}

/// Device identifiers: lowercase, whitespace to underscores.
pub fn normalize_device(s: &str) -> String {
    squash_whitespace(&s.to_lowercase(), '_')
}

/// Attribute identifiers keep their case (platform attributes such as
/// `locationMode` are case-significant); whitespace becomes underscores.
pub fn normalize_attribute(s: &str) -> String {
    squash_whitespace(s, '_')
}

/// Actions: uppercase, whitespace to underscores.
pub fn normalize_action(s: &str) -> String {
    squash_whitespace(&s.to_uppercase(), '_')
}

fn spec_to_atom(spec: &RawEventSpec, abstraction: &AbstractionMap, synonyms: &SynonymTable) -> Result<AtomicEvent> {
    let device = spec
        .device
        .as_deref()
        .filter(|d| !d.trim().is_empty())
        .map(|d| normalize_device(synonyms.resolve(d)));
    let attribute = normalize_attribute(synonyms.resolve(&spec.attribute));
    let action = match &spec.value {
        RawValue::Number(n) => abstraction.label_for(&attribute, *n)?.to_string(),
        RawValue::Text(t) => normalize_action(synonyms.resolve(t)),
    };
    AtomicEvent::new(device.as_deref(), &attribute, &action)
}

fn specs_to_token(
    specs: &[RawEventSpec],
    side: &str,
    abstraction: &AbstractionMap,
    synonyms: &SynonymTable,
) -> Result<EventToken> {
    if specs.is_empty() {
        return Err(Error::Routine(format!("routine has no {side} events")));
    }
    let atoms = specs.iter().map(|s| spec_to_atom(s, abstraction, synonyms)).collect::<Result<Vec<_>>>()?;
    if atoms.len() == 1 {
        Ok(EventToken::Atomic(atoms.into_iter().next().expect("one atom")))
    } else {
        // Simultaneous events collapse into one canonical conjunction token.
        EventToken::conjunction(atoms)
    }
}

/// Normalizes one raw routine: identifiers canonicalized, synonyms resolved,
/// continuous values abstracted, and each side's simultaneous events collapsed
/// into a single (possibly conjunction) token.
pub fn tokenize_routine(raw: &RawRoutine, abstraction: &AbstractionMap, synonyms: &SynonymTable) -> Result<Routine> {
    let trigger = specs_to_token(&raw.triggers, "trigger", abstraction, synonyms)
        .map_err(|e| Error::Routine(format!("routine `{}`: {e}", raw.id)))?;
    let action = specs_to_token(&raw.actions, "action", abstraction, synonyms)
        .map_err(|e| Error::Routine(format!("routine `{}`: {e}", raw.id)))?;
    Routine::new(raw.id.clone(), vec![trigger], vec![action], raw.indicators, raw.specific_time)
}

// ---------------------------------------------------------------------------
// Ingest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
            Severity::Info => f.write_str("info"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Diagnostic { severity: Severity::Error, message }
    }

    fn info(message: String) -> Self {
        Diagnostic { severity: Severity::Info, message }
    }
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub routines: Vec<Routine>,
    pub diagnostics: Vec<Diagnostic>,
}

impl IngestOutcome {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }
}

/// Truncated two-decimal percentage (11 of 273 renders as `4.02`).
fn truncated_percent(count: usize, total: usize) -> String {
    if total == 0 {
        return "0.00".into();
    }
    let hundredths = count * 10000 / total;
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Validates and normalizes a raw routine set.
///
/// All problems are reported as diagnostics rather than a hard error so that a
/// single run surfaces every issue; callers treat any `Severity::Error`
/// diagnostic as failure. Info diagnostics always include the NOT_SURE tally
/// per indicator, e.g. `time_range not_sure: 11 (4.02%)`.
pub fn ingest(
    raws: &[RawRoutine],
    abstraction: &AbstractionMap,
    synonyms: &SynonymTable,
    device_map: Option<&DeviceMap>,
) -> IngestOutcome {
    let mut diagnostics = Vec::new();
    let mut routines = Vec::new();
    let mut seen_ids: BTreeMap<String, usize> = BTreeMap::new();

    if raws.is_empty() {
        diagnostics.push(Diagnostic::error("routine file contains no routines".into()));
    }

    for (i, raw) in raws.iter().enumerate() {
        let record = i + 1;
        if let Some(first) = seen_ids.get(&raw.id) {
            diagnostics.push(Diagnostic::error(format!(
                "record {record}: duplicate routine id `{}` (first used in record {first})",
                raw.id
            )));
            continue;
        }
        seen_ids.insert(raw.id.clone(), record);

        match tokenize_routine(raw, abstraction, synonyms) {
            Ok(routine) => {
                if let Some(map) = device_map {
                    for token in routine.instance_tokens() {
                        for atom in token.atoms() {
                            if !map.declares(atom.device(), atom.attribute()) {
                                diagnostics.push(Diagnostic::error(format!(
                                    "record {record}: unknown attribute `{}` for device `{}`",
                                    atom.attribute(),
                                    atom.device().unwrap_or("<home>")
                                )));
                            }
                        }
                    }
                }
                routines.push(routine);
            }
            Err(e) => diagnostics.push(Diagnostic::error(format!("record {record}: {e}"))),
        }
    }

    let total = raws.len();
    let not_sure_time = raws.iter().filter(|r| r.indicators.time_range == TimeRange::NotSure).count();
    let not_sure_freq = raws.iter().filter(|r| r.indicators.frequency == Frequency::NotSure).count();
    let not_sure_day = raws.iter().filter(|r| r.indicators.day_range == DayRange::NotSure).count();
    diagnostics.push(Diagnostic::info(format!(
        "time_range not_sure: {not_sure_time} ({}%)",
        truncated_percent(not_sure_time, total)
    )));
    diagnostics.push(Diagnostic::info(format!(
        "frequency not_sure: {not_sure_freq} ({}%)",
        truncated_percent(not_sure_freq, total)
    )));
    diagnostics.push(Diagnostic::info(format!(
        "day_range not_sure: {not_sure_day} ({}%)",
        truncated_percent(not_sure_day, total)
    )));

    IngestOutcome { routines, diagnostics }
}
