//! Event tokens: the atomic unit of home-automation sequences.
//!
//! An atomic event is a `<device, attribute, action>` triple. Its wire form is
//! `device|attribute|ACTION`; home-level events (no device) keep the leading
//! separator with an empty device segment, e.g. `|locationMode|HOME`.
//! Simultaneous events collapse into a single *conjunction* token whose
//! sub-events are joined with `&` and kept in canonical order (ascending by
//! device, device-less sub-events last), so any permutation of the same
//! sub-events serializes identically.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Separator between the fields of an atomic event.
pub const FIELD_SEPARATOR: char = '|';
/// Separator between the sub-events of a conjunction token.
pub const CONJUNCTION_SEPARATOR: char = '&';

/// One `<device, attribute, action>` event. `device == None` marks a
/// home-level event such as a location-mode change.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicEvent {
    device: Option<String>,
    attribute: String,
    action: String,
}

impl AtomicEvent {
    /// Builds an atomic event, validating each segment's grammar.
    pub fn new(device: Option<&str>, attribute: &str, action: &str) -> Result<Self> {
        let device = match device {
            None | Some("") => None,
            Some(d) => {
                check_segment(d, "device", |i, c| {
                    if i == 0 { c.is_ascii_lowercase() } else { c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' }
                })?;
                Some(d.to_string())
            }
        };
        if attribute.is_empty() {
            return Err(Error::Token("missing attribute segment".into()));
        }
        check_segment(attribute, "attribute", |i, c| {
            if i == 0 { c.is_ascii_alphabetic() } else { c.is_ascii_alphanumeric() || c == '_' }
        })?;
        if action.is_empty() {
            return Err(Error::Token("missing action segment".into()));
        }
        check_segment(action, "action", |_, c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')?;
        Ok(AtomicEvent { device, attribute: attribute.to_string(), action: action.to_string() })
    }

    pub fn device(&self) -> Option<&str> {
        self.device.as_deref()
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn action(&self) -> &str {
        &self.action
    }

    fn wire(&self) -> String {
        format!(
            "{}{sep}{}{sep}{}",
            self.device.as_deref().unwrap_or(""),
            self.attribute,
            self.action,
            sep = FIELD_SEPARATOR
        )
    }
}

fn check_segment(s: &str, name: &str, ok: impl Fn(usize, char) -> bool) -> Result<()> {
    for (i, c) in s.chars().enumerate() {
        if !ok(i, c) {
            return Err(Error::Token(format!("invalid character `{c}` in {name} segment `{s}`")));
        }
    }
    Ok(())
}

/// Canonical sub-event order: ascending device, device-less sub-events last,
/// ties resolved by attribute then action.
impl Ord for AtomicEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |e: &AtomicEvent| (e.device.is_none(), e.device.clone());
        key(self)
            .cmp(&key(other))
            .then_with(|| self.attribute.cmp(&other.attribute))
            .then_with(|| self.action.cmp(&other.action))
    }
}

impl PartialOrd for AtomicEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single position in an event sequence: either one atomic event or a
/// conjunction of simultaneous atomic events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventToken {
    Atomic(AtomicEvent),
    /// Always holds at least two sub-events, in canonical order.
    Conjunction(Vec<AtomicEvent>),
}

impl EventToken {
    pub fn atomic(device: Option<&str>, attribute: &str, action: &str) -> Result<Self> {
        Ok(EventToken::Atomic(AtomicEvent::new(device, attribute, action)?))
    }

    /// Builds a conjunction token; the parts are sorted into canonical order.
    pub fn conjunction(mut parts: Vec<AtomicEvent>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::Token(format!(
                "conjunction token needs at least two sub-events, got {}",
                parts.len()
            )));
        }
        parts.sort();
        Ok(EventToken::Conjunction(parts))
    }

    /// The atomic events this token carries (one for atomic tokens).
    pub fn atoms(&self) -> &[AtomicEvent] {
        match self {
            EventToken::Atomic(a) => std::slice::from_ref(a),
            EventToken::Conjunction(parts) => parts,
        }
    }

    pub fn is_conjunction(&self) -> bool {
        matches!(self, EventToken::Conjunction(_))
    }

    /// Wire form of this token (`Display` renders the same string).
    pub fn serialize(&self) -> String {
        match self {
            EventToken::Atomic(a) => a.wire(),
            EventToken::Conjunction(parts) => parts
                .iter()
                .map(AtomicEvent::wire)
                .collect::<Vec<_>>()
                .join(&CONJUNCTION_SEPARATOR.to_string()),
        }
    }

    /// Parses a wire-form token. Conjunctions are canonicalized, so parsing a
    /// permuted conjunction yields the same value as the sorted one.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Token("empty token".into()));
        }
        let parts: Vec<&str> = s.split(CONJUNCTION_SEPARATOR).collect();
        if parts.len() == 1 {
            Ok(EventToken::Atomic(parse_atomic(parts[0])?))
        } else {
            let atoms = parts.iter().map(|p| parse_atomic(p)).collect::<Result<Vec<_>>>()?;
            EventToken::conjunction(atoms)
        }
    }
}

fn parse_atomic(s: &str) -> Result<AtomicEvent> {
    let fields: Vec<&str> = s.split(FIELD_SEPARATOR).collect();
    match fields.len() {
        3 => AtomicEvent::new(Some(fields[0]), fields[1], fields[2])
            .map_err(|e| Error::Token(format!("in token `{s}`: {e}"))),
        2 => Err(Error::Token(format!("token `{s}`: missing action segment"))),
        1 => Err(Error::Token(format!("token `{s}`: missing attribute and action segments"))),
        n => Err(Error::Token(format!("token `{s}`: expected 3 fields, found {n}"))),
    }
}

impl fmt::Display for EventToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for EventToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventToken::parse(s)
    }
}

// Tokens travel inside normalized routine files as their wire strings.
impl serde::Serialize for EventToken {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.serialize())
    }
}

impl<'de> serde::Deserialize<'de> for EventToken {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        EventToken::parse(&s).map_err(serde::de::Error::custom)
    }
}
