//! Scenario replay against security policies.
//!
//! A scenario is replayed through a snapshot of home state: every attribute
//! starts out unknown and each event overwrites the attributes it names.
//! Policies come in two kinds. A *state-forbidden* policy fires the moment its
//! trigger matches an event while every condition predicate holds on the
//! updated snapshot. An *obligation* policy starts a countdown instead: the
//! obligated event must appear within a fixed window of subsequent events,
//! otherwise a violation is recorded at the deadline (or at the scenario's end
//! if it finishes first). Unknown attribute values satisfy no predicate —
//! including negated ones — so policies only ever fire on observed state.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{AtomicEvent, EventToken};

/// Value reported for attributes no event has set yet.
pub const UNKNOWN_VALUE: &str = "UNKNOWN";

/// Default number of follow-up events an obligation may be satisfied within.
pub const DEFAULT_OBLIGATION_WINDOW: usize = 3;

/// Snapshot of every observed device and home-level attribute.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomeState {
    devices: BTreeMap<(String, String), String>,
    home: BTreeMap<String, String>,
}

impl HomeState {
    /// Current value of an attribute; `None` device means home-level.
    pub fn value(&self, device: Option<&str>, attribute: &str) -> &str {
        let v = match device {
            Some(d) => self.devices.get(&(d.to_string(), attribute.to_string())),
            None => self.home.get(attribute),
        };
        v.map_or(UNKNOWN_VALUE, String::as_str)
    }

    /// Applies an event: each atom overwrites its attribute with the action.
    pub fn apply(&mut self, event: &EventToken) {
        for atom in event.atoms() {
            match atom.device() {
                Some(d) => {
                    self.devices
                        .insert((d.to_string(), atom.attribute().to_string()), atom.action().to_string());
                }
                None => {
                    self.home.insert(atom.attribute().to_string(), atom.action().to_string());
                }
            }
        }
    }
}

/// Matcher for one field of an event pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
enum NameMatch {
    Any,
    Exact(String),
}

impl NameMatch {
    fn from_raw(raw: Option<String>) -> NameMatch {
        match raw.as_deref() {
            None | Some("*") => NameMatch::Any,
            Some(_) => NameMatch::Exact(raw.unwrap()),
        }
    }

    fn matches(&self, name: &str) -> bool {
        match self {
            NameMatch::Any => true,
            NameMatch::Exact(s) => s == name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum DeviceMatch {
    /// `"*"`: any device, including home-level events.
    Any,
    /// Absent or null device field: home-level events only.
    Home,
    Named(String),
}

impl DeviceMatch {
    fn matches(&self, device: Option<&str>) -> bool {
        match self {
            DeviceMatch::Any => true,
            DeviceMatch::Home => device.is_none(),
            DeviceMatch::Named(d) => device == Some(d.as_str()),
        }
    }
}

/// Structural pattern over events. A conjunction matches if any of its atoms
/// does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventPattern {
    device: DeviceMatch,
    attribute: NameMatch,
    action: NameMatch,
}

impl EventPattern {
    fn from_raw(raw: RawPattern) -> EventPattern {
        let device = match raw.device.as_deref() {
            None => DeviceMatch::Home,
            Some("*") => DeviceMatch::Any,
            Some(_) => DeviceMatch::Named(raw.device.unwrap()),
        };
        EventPattern {
            device,
            attribute: NameMatch::from_raw(raw.attribute),
            action: NameMatch::from_raw(raw.action),
        }
    }

    fn matches_atom(&self, atom: &AtomicEvent) -> bool {
        self.device.matches(atom.device())
            && self.attribute.matches(atom.attribute())
            && self.action.matches(atom.action())
    }

    pub fn matches(&self, event: &EventToken) -> bool {
        event.atoms().iter().any(|a| self.matches_atom(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trigger {
    /// Every event is a trigger; the policy is a pure state check.
    Any,
    Pattern(EventPattern),
}

impl Trigger {
    pub fn matches(&self, event: &EventToken) -> bool {
        match self {
            Trigger::Any => true,
            Trigger::Pattern(p) => p.matches(event),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Subject {
    Device { device: String, attribute: String },
    Home { attribute: String },
}

impl Subject {
    fn key(&self) -> String {
        match self {
            Subject::Device { device, attribute } => format!("{device}.{attribute}"),
            Subject::Home { attribute } => format!("home.{attribute}"),
        }
    }

    fn value<'a>(&self, state: &'a HomeState) -> &'a str {
        match self {
            Subject::Device { device, attribute } => state.value(Some(device), attribute),
            Subject::Home { attribute } => state.value(None, attribute),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PredicateOp {
    Eq(String),
    Ne(String),
    In(Vec<String>),
    NotIn(Vec<String>),
}

/// A check against the current snapshot. An unknown actual value fails every
/// operator, negated ones included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePredicate {
    subject: Subject,
    op: PredicateOp,
}

impl StatePredicate {
    pub fn holds(&self, state: &HomeState) -> bool {
        let actual = self.subject.value(state);
        if actual == UNKNOWN_VALUE {
            return false;
        }
        match &self.op {
            PredicateOp::Eq(v) => actual == v,
            PredicateOp::Ne(v) => actual != v,
            PredicateOp::In(vs) => vs.iter().any(|v| v == actual),
            PredicateOp::NotIn(vs) => vs.iter().all(|v| v != actual),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    StateForbidden,
    Obligation,
}

/// One security policy, parsed and validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    id: String,
    kind: PolicyKind,
    trigger: Trigger,
    condition: Vec<StatePredicate>,
    obligation: Option<EventPattern>,
    window: usize,
    description: String,
}

impl Policy {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    fn condition_holds(&self, state: &HomeState) -> bool {
        self.condition.iter().all(|p| p.holds(state))
    }

    /// The condition subjects and their current values, for reports.
    fn snapshot_subset(&self, state: &HomeState) -> BTreeMap<String, String> {
        self.condition
            .iter()
            .map(|p| (p.subject.key(), p.subject.value(state).to_string()))
            .collect()
    }
}

// --- wire format -----------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    #[serde(default)]
    device: Option<String>,
    #[serde(default)]
    attribute: Option<String>,
    #[serde(default)]
    action: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTrigger {
    Keyword(String),
    Pattern(RawPattern),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicate {
    #[serde(default)]
    device: Option<String>,
    attribute: String,
    op: String,
    #[serde(default)]
    value: Option<String>,
    #[serde(default)]
    values: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    id: String,
    kind: PolicyKind,
    trigger: RawTrigger,
    #[serde(default)]
    condition: Vec<RawPredicate>,
    #[serde(default)]
    obligation: Option<RawPattern>,
    #[serde(default)]
    window: Option<usize>,
    #[serde(default)]
    description: String,
}

fn build_predicate(raw: RawPredicate) -> Result<StatePredicate> {
    let subject = match raw.device {
        Some(ref d) if d == "*" => {
            return Err(Error::Policy("predicate device must name a concrete device".into()));
        }
        Some(d) => Subject::Device { device: d, attribute: raw.attribute },
        None => Subject::Home { attribute: raw.attribute },
    };
    let op = match (raw.op.as_str(), raw.value, raw.values) {
        ("eq", Some(v), None) => PredicateOp::Eq(v),
        ("ne", Some(v), None) => PredicateOp::Ne(v),
        ("in", None, Some(vs)) if !vs.is_empty() => PredicateOp::In(vs),
        ("not_in", None, Some(vs)) if !vs.is_empty() => PredicateOp::NotIn(vs),
        ("eq" | "ne", ..) => {
            return Err(Error::Policy(format!("op `{}` takes exactly a `value`", raw.op)));
        }
        ("in" | "not_in", ..) => {
            return Err(Error::Policy(format!("op `{}` takes a non-empty `values` list", raw.op)));
        }
        (other, ..) => {
            return Err(Error::Policy(format!(
                "unknown op `{other}` (expected eq, ne, in, or not_in)"
            )));
        }
    };
    Ok(StatePredicate { subject, op })
}

fn build_policy(raw: RawPolicy) -> Result<Policy> {
    if raw.id.is_empty() {
        return Err(Error::Policy("policy id must be non-empty".into()));
    }
    let trigger = match raw.trigger {
        RawTrigger::Keyword(k) if k == "any" => Trigger::Any,
        RawTrigger::Keyword(k) => {
            return Err(Error::Policy(format!("unknown trigger keyword `{k}` (expected \"any\")")));
        }
        RawTrigger::Pattern(p) => Trigger::Pattern(EventPattern::from_raw(p)),
    };
    let condition =
        raw.condition.into_iter().map(build_predicate).collect::<Result<Vec<_>>>()?;
    let (obligation, window) = match raw.kind {
        PolicyKind::StateForbidden => {
            if raw.obligation.is_some() || raw.window.is_some() {
                return Err(Error::Policy(
                    "state_forbidden policies take neither an obligation nor a window".into(),
                ));
            }
            (None, 0)
        }
        PolicyKind::Obligation => {
            let pattern = raw.obligation.ok_or_else(|| {
                Error::Policy("obligation policies require an obligation pattern".into())
            })?;
            let window = raw.window.unwrap_or(DEFAULT_OBLIGATION_WINDOW);
            if window == 0 {
                return Err(Error::Policy("obligation window must be at least 1".into()));
            }
            (Some(EventPattern::from_raw(pattern)), window)
        }
    };
    Ok(Policy {
        id: raw.id,
        kind: raw.kind,
        trigger,
        condition,
        obligation,
        window,
        description: raw.description,
    })
}

/// Parses a policy set: one JSON object per line, `#` comments and blank
/// lines ignored.
pub fn parse_policies(text: &str, source: &str) -> Result<Vec<Policy>> {
    let mut policies = Vec::new();
    let mut ids = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let raw: RawPolicy = serde_json::from_str(line).map_err(|e| {
            Error::Policy(format!("{source} line {}: {e}", lineno + 1))
        })?;
        let policy = build_policy(raw)
            .map_err(|e| Error::Policy(format!("{source} line {}: {e}", lineno + 1)))?;
        if !ids.insert(policy.id.clone()) {
            return Err(Error::Policy(format!(
                "{source} line {}: duplicate policy id `{}`",
                lineno + 1,
                policy.id
            )));
        }
        policies.push(policy);
    }
    if policies.is_empty() {
        return Err(Error::Policy(format!("{source}: no policies defined")));
    }
    Ok(policies)
}

pub fn load_policies(path: impl AsRef<Path>) -> Result<Vec<Policy>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_policies(&text, &path.display().to_string())
}

// --- replay ----------------------------------------------------------------

/// One detected policy violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub policy_id: String,
    /// Index the violation is registered at (for obligations: the deadline,
    /// clamped to the scenario's last event).
    pub event_index: usize,
    /// Index of the event that triggered the policy.
    pub trigger_index: usize,
    /// The triggering event, in wire form.
    pub event: String,
    /// Condition subjects and their values when the policy fired.
    pub snapshot: BTreeMap<String, String>,
    pub detail: String,
    pub description: String,
}

struct Pending {
    policy_idx: usize,
    trigger_index: usize,
    deadline: usize,
    snapshot: BTreeMap<String, String>,
}

/// Replays a scenario and returns all violations, ordered by event index.
///
/// Per event the checker applies the event to the snapshot, resolves pending
/// obligations the event satisfies, fires matching state-forbidden policies,
/// starts countdowns for newly triggered obligations, and finally expires
/// countdowns whose deadline is this event. Obligations still pending when
/// the scenario ends are reported at the final event.
pub fn check(events: &[EventToken], policies: &[Policy]) -> Vec<Violation> {
    let mut state = HomeState::default();
    let mut pending: Vec<Pending> = Vec::new();
    let mut violations: Vec<Violation> = Vec::new();
    for (i, event) in events.iter().enumerate() {
        state.apply(event);
        pending.retain(|p| {
            let pattern = policies[p.policy_idx]
                .obligation
                .as_ref()
                .expect("pending entries only exist for obligation policies");
            !pattern.matches(event)
        });
        for policy in policies.iter().filter(|p| p.kind == PolicyKind::StateForbidden) {
            if policy.trigger.matches(event) && policy.condition_holds(&state) {
                violations.push(Violation {
                    policy_id: policy.id.clone(),
                    event_index: i,
                    trigger_index: i,
                    event: event.serialize(),
                    snapshot: policy.snapshot_subset(&state),
                    detail: "forbidden state combination".into(),
                    description: policy.description.clone(),
                });
            }
        }
        for (pi, policy) in policies.iter().enumerate() {
            if policy.kind == PolicyKind::Obligation
                && policy.trigger.matches(event)
                && policy.condition_holds(&state)
            {
                pending.push(Pending {
                    policy_idx: pi,
                    trigger_index: i,
                    deadline: i + policy.window,
                    snapshot: policy.snapshot_subset(&state),
                });
            }
        }
        pending.retain(|p| {
            if p.deadline == i {
                violations.push(expiry_violation(p, i, events, policies));
                false
            } else {
                true
            }
        });
    }
    if !events.is_empty() {
        let last = events.len() - 1;
        for p in &pending {
            violations.push(expiry_violation(p, last, events, policies));
        }
    }
    violations.sort_by_key(|v| v.event_index);
    violations
}

fn expiry_violation(
    p: &Pending,
    at: usize,
    events: &[EventToken],
    policies: &[Policy],
) -> Violation {
    let policy = &policies[p.policy_idx];
    Violation {
        policy_id: policy.id.clone(),
        event_index: at,
        trigger_index: p.trigger_index,
        event: events[p.trigger_index].serialize(),
        snapshot: p.snapshot.clone(),
        detail: format!(
            "obligation unmet within {} event(s) of event {}",
            policy.window, p.trigger_index
        ),
        description: policy.description.clone(),
    }
}

/// Human-readable violation report.
pub fn render_report(violations: &[Violation]) -> String {
    if violations.is_empty() {
        return "no violations\n".to_string();
    }
    let mut out = String::new();
    for v in violations {
        let _ = writeln!(out, "violation: {} at event {}", v.policy_id, v.event_index);
        let _ = writeln!(out, "  event: {}", v.event);
        let state = if v.snapshot.is_empty() {
            "(none)".to_string()
        } else {
            v.snapshot
                .iter()
                .map(|(k, val)| format!("{k}={val}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "  state: {state}");
        let _ = writeln!(out, "  cause: {}", v.detail);
        let _ = writeln!(out, "  policy: {}", v.description);
    }
    let _ = writeln!(out, "{} violation(s)", violations.len());
    out
}

/// One JSON object per violation, one per line.
pub fn violation_records(violations: &[Violation]) -> Result<String> {
    let mut out = String::new();
    for v in violations {
        let line = serde_json::to_string(v)
            .map_err(|e| Error::Policy(format!("cannot serialize violation: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
