//! Core library for the `helion` home-automation modeling toolkit.
//!
//! The pipeline runs in stages, each with its own module:
//!
//! * [`event`] / [`corpus`] — the `device|attribute|ACTION` token grammar and
//!   whitespace-separated event sequences.
//! * [`routine`] — trigger-action routine descriptions, their normalization
//!   into event tokens, and the ingestion diagnostics.
//! * [`schedule`] — placement of routines into an hourly timeline according
//!   to their execution indicators, and corpus extraction from the timeline.
//! * [`ngram`] — interpolated n-gram language models with absolute
//!   discounting, cross-entropy evaluation, and k-fold reports.
//! * [`generate`] — scenario generation (most- and least-probable flavors and
//!   their hybrids) plus routine extraction from generated continuations.
//! * [`snapshot`] — scenario replay against security policies over a
//!   snapshot of home state.
//!
//! Everything is deterministic given the inputs and an explicit seed; derived
//! random streams live in [`seed`].

pub mod corpus;
pub mod error;
pub mod event;
pub mod generate;
pub mod ngram;
pub mod routine;
pub mod schedule;
pub mod seed;
pub mod snapshot;

pub use corpus::{
    corpus_to_string, parse_corpus, read_corpus, write_corpus, Sequence, Vocabulary, UNKNOWN_TOKEN,
};
pub use error::{Error, Result};
pub use event::{AtomicEvent, EventToken};
pub use generate::{
    extract_routines, generate, next_event, ExtractionConfig, ExtractionReport, ExtractionRound,
    Flavor, GenerationConfig, PickDirection, PickMode, Scenario,
};
pub use ngram::{
    kfold_entropy, parse_model, segment, train, train_with, EntropyReport, FoldEntropy,
    NgramModel, TrainConfig, DEFAULT_SENTENCE_LEN,
};
pub use routine::{
    ingest, parse_raw_routines, read_raw_routines, read_routines, routines_to_string,
    tokenize_routine, write_routines, AbstractionEntry, AbstractionMap, DeviceMap, Diagnostic,
    DayRange, ExecutionIndicators, Frequency, IngestOutcome, RawEventSpec, RawRoutine, RawValue,
    Routine, Severity, SynonymTable, TimeRange,
};
pub use schedule::{
    extract_sequence, instance_count_bounds, is_weekday, schedule, schedule_user, ScheduleTimeline,
    SlotWindow, DAY_SKEW, DEFAULT_DAYS, HOURS_PER_DAY,
};
pub use snapshot::{
    check, load_policies, parse_policies, render_report, violation_records, EventPattern,
    HomeState, Policy, PolicyKind, StatePredicate, Trigger, Violation,
    DEFAULT_OBLIGATION_WINDOW, UNKNOWN_VALUE,
};
