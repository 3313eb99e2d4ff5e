//! Informed scheduling.
//!
//! Places routine instances into a month-long hourly timeline using each
//! routine's execution indicators, then extracts the ordered event sequence.
//! Placement runs in three phases: fixed-clock routines first (one instance at
//! their hour on every admissible day), then time-constrained routines
//! uniformly over their hour window with an 80/20 day-class skew, and finally
//! time-unconstrained routines scattered over the remaining empty slots.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sequence;
use crate::error::{Error, Result};
use crate::event::EventToken;
use crate::routine::{DayRange, Frequency, Routine, TimeRange};
use crate::seed;

pub const HOURS_PER_DAY: usize = 24;
pub const DEFAULT_DAYS: usize = 30;

/// Share of a day-constrained routine's instances placed on its favored day
/// class (the rest land on the complementary class).
pub const DAY_SKEW: f64 = 0.8;

/// Day 0 of every timeline is a Monday, so positions 0–4 of each week are
/// weekdays and 5–6 the weekend.
pub fn is_weekday(day: usize) -> bool {
    day % 7 < 5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayFilter {
    Weekdays,
    Weekends,
    Any,
}

impl DayFilter {
    pub fn admits(self, day: usize) -> bool {
        match self {
            DayFilter::Weekdays => is_weekday(day),
            DayFilter::Weekends => !is_weekday(day),
            DayFilter::Any => true,
        }
    }

    fn for_day_range(range: DayRange) -> DayFilter {
        match range {
            DayRange::Weekdays => DayFilter::Weekdays,
            DayRange::Weekends => DayFilter::Weekends,
            DayRange::Anytime | DayRange::NotSure => DayFilter::Any,
        }
    }
}

/// The candidate hours and days for one routine's placements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotWindow {
    hours: Vec<u8>,
    day_filter: DayFilter,
    unconstrained: bool,
}

impl SlotWindow {
    pub fn hours(&self) -> &[u8] {
        &self.hours
    }

    pub fn day_filter(&self) -> DayFilter {
        self.day_filter
    }

    /// True when the time range gave no information (NOT_SURE): the routine is
    /// placed over leftover capacity instead of a preferred window.
    pub fn is_unconstrained(&self) -> bool {
        self.unconstrained
    }

    pub fn contains(&self, day: usize, hour: u8) -> bool {
        self.day_filter.admits(day) && self.hours.contains(&hour)
    }
}

/// Maps execution indicators to their hour window and day filter.
pub fn slot_window_for(indicators: &crate::routine::ExecutionIndicators) -> SlotWindow {
    let (hours, unconstrained): (Vec<u8>, bool) = match indicators.time_range {
        TimeRange::EarlyMorning => ((5..=7).collect(), false),
        TimeRange::Morning => ((8..=11).collect(), false),
        TimeRange::Noon => ((12..=13).collect(), false),
        TimeRange::Afternoon => ((14..=16).collect(), false),
        TimeRange::Evening => ((17..=20).collect(), false),
        TimeRange::Night => ((21..=23).collect(), false),
        TimeRange::LateNight => ((0..=4).collect(), false),
        TimeRange::Anytime => ((0..=23).collect(), false),
        TimeRange::NotSure => ((0..=23).collect(), true),
    };
    SlotWindow { hours, day_filter: DayFilter::for_day_range(indicators.day_range), unconstrained }
}

/// The (low, high, period-in-days) band for a frequency enumerant; an absent
/// answer is read as the most conservative band (a few times a month).
fn frequency_band(frequency: Frequency) -> (usize, usize, usize) {
    match frequency {
        Frequency::ManyPerDay => (4, 8, 1),
        Frequency::FewPerDay => (1, 3, 1),
        Frequency::FewPerWeek => (1, 4, 7),
        Frequency::FewPerMonth | Frequency::NotSure => (1, 4, 30),
    }
}

/// Draws a per-period rate uniformly from the frequency band and scales it to
/// the horizon (at least one instance).
pub fn instance_count_for(frequency: Frequency, days: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    if days == 0 {
        return Err(Error::Schedule("horizon must be at least one day".into()));
    }
    let (lo, hi, period) = frequency_band(frequency);
    let rate = rng.random_range(lo..=hi);
    let count = ((rate * days) as f64 / period as f64).round() as usize;
    Ok(count.max(1))
}

/// Bounds on the instance count a frequency enumerant can yield over a
/// horizon, matching [`instance_count_for`]'s extremes.
pub fn instance_count_bounds(frequency: Frequency, days: usize) -> (usize, usize) {
    let (lo, hi, period) = frequency_band(frequency);
    let scale = |rate: usize| (((rate * days) as f64 / period as f64).round() as usize).max(1);
    (scale(lo), scale(hi))
}

/// A month-long timeline of hourly slots, each holding the routine ids placed
/// there in placement order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTimeline {
    days: usize,
    slots: Vec<Vec<String>>,
}

impl ScheduleTimeline {
    fn new(days: usize) -> Self {
        ScheduleTimeline { days, slots: vec![Vec::new(); days * HOURS_PER_DAY] }
    }

    pub fn days(&self) -> usize {
        self.days
    }

    pub fn slot(&self, day: usize, hour: usize) -> &[String] {
        &self.slots[day * HOURS_PER_DAY + hour]
    }

    fn slot_mut(&mut self, day: usize, hour: usize) -> &mut Vec<String> {
        &mut self.slots[day * HOURS_PER_DAY + hour]
    }

    /// All placements in chronological slot order (placement order within a
    /// slot), as `(day, hour, routine id)`.
    pub fn placements(&self) -> impl Iterator<Item = (usize, usize, &str)> {
        self.slots.iter().enumerate().flat_map(|(i, ids)| {
            ids.iter().map(move |id| (i / HOURS_PER_DAY, i % HOURS_PER_DAY, id.as_str()))
        })
    }

    pub fn instance_count(&self, id: &str) -> usize {
        self.placements().filter(|(_, _, placed)| *placed == id).count()
    }

    /// Dump rows in the documented `day,hour,routine_id` column order.
    pub fn dump(&self) -> String {
        let mut out = String::from("day,hour,routine_id\n");
        for (day, hour, id) in self.placements() {
            out.push_str(&format!("{day},{hour},{id}\n"));
        }
        out
    }
}

/// How many of `n` instances land on the favored day class: all of them when
/// no complementary day exists, otherwise ⌈80%⌉ (never below the skew ratio).
fn favored_share(n: usize, has_complement: bool) -> usize {
    if has_complement {
        (n * 4).div_ceil(5)
    } else {
        n
    }
}

/// Draws `k` distinct indices from `0..len` (partial Fisher-Yates).
fn draw_distinct(len: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(k <= len);
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..k {
        let j = rng.random_range(i..len);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

struct Placer<'a> {
    timeline: ScheduleTimeline,
    days: usize,
    rng: &'a mut ChaCha8Rng,
    over_constrained: Vec<String>,
}

impl Placer<'_> {
    fn admissible_days(&self, filter: DayFilter) -> (Vec<usize>, Vec<usize>) {
        let (favored, complement): (Vec<usize>, Vec<usize>) =
            (0..self.days).partition(|&d| filter.admits(d));
        (favored, complement)
    }

    /// Phase 1: a fixed-clock routine runs once at its hour on every
    /// admissible day.
    fn place_fixed(&mut self, routine: &Routine, hour: u8, window: &SlotWindow) {
        let (favored, _) = self.admissible_days(window.day_filter());
        if favored.is_empty() {
            self.over_constrained.push(routine.id().to_string());
            return;
        }
        for day in favored {
            self.timeline.slot_mut(day, hour as usize).push(routine.id().to_string());
        }
    }

    /// Phase 2: uniform placement over the hour window, day classes skewed.
    fn place_windowed(&mut self, routine: &Routine, window: &SlotWindow) -> Result<()> {
        let n = instance_count_for(routine.indicators().frequency, self.days, self.rng)?;
        let (favored, complement) = self.admissible_days(window.day_filter());
        if favored.is_empty() {
            self.over_constrained.push(routine.id().to_string());
            return Ok(());
        }
        let favored_n = favored_share(n, !complement.is_empty());
        for i in 0..n {
            let pool = if i < favored_n { &favored } else { &complement };
            let day = pool[self.rng.random_range(0..pool.len())];
            let hour = window.hours()[self.rng.random_range(0..window.hours().len())];
            self.timeline.slot_mut(day, hour as usize).push(routine.id().to_string());
        }
        Ok(())
    }

    /// Phase 3: a time-unconstrained routine is scattered over slots that are
    /// still empty, without replacement, keeping the day-class skew.
    fn place_unconstrained(&mut self, routine: &Routine, window: &SlotWindow) -> Result<()> {
        let n = instance_count_for(routine.indicators().frequency, self.days, self.rng)?;
        let (favored_days, complement_days) = self.admissible_days(window.day_filter());
        if favored_days.is_empty() {
            self.over_constrained.push(routine.id().to_string());
            return Ok(());
        }
        let favored_n = favored_share(n, !complement_days.is_empty());
        let empty_in = |days: &[usize], t: &ScheduleTimeline| -> Vec<(usize, usize)> {
            days.iter()
                .flat_map(|&d| (0..HOURS_PER_DAY).map(move |h| (d, h)))
                .filter(|&(d, h)| t.slot(d, h).is_empty())
                .collect()
        };
        let favored_empty = empty_in(&favored_days, &self.timeline);
        let complement_empty = empty_in(&complement_days, &self.timeline);
        if favored_empty.len() < favored_n || complement_empty.len() < n - favored_n {
            self.over_constrained.push(routine.id().to_string());
            return Ok(());
        }
        for idx in draw_distinct(favored_empty.len(), favored_n, self.rng) {
            let (day, hour) = favored_empty[idx];
            self.timeline.slot_mut(day, hour).push(routine.id().to_string());
        }
        for idx in draw_distinct(complement_empty.len(), n - favored_n, self.rng) {
            let (day, hour) = complement_empty[idx];
            self.timeline.slot_mut(day, hour).push(routine.id().to_string());
        }
        Ok(())
    }
}

fn schedule_with_rng(routines: &[Routine], days: usize, rng: &mut ChaCha8Rng) -> Result<ScheduleTimeline> {
    if routines.is_empty() {
        return Err(Error::Schedule("no routines to schedule".into()));
    }
    if days == 0 {
        return Err(Error::Schedule("horizon must be at least one day".into()));
    }
    let mut seen = BTreeSet::new();
    for r in routines {
        if !seen.insert(r.id()) {
            return Err(Error::Schedule(format!("duplicate routine id `{}`", r.id())));
        }
    }

    let mut placer = Placer {
        timeline: ScheduleTimeline::new(days),
        days,
        rng,
        over_constrained: Vec::new(),
    };

    // Fixed-clock routines claim their hours first.
    for routine in routines {
        if let Some(hour) = routine.specific_time() {
            let window = slot_window_for(routine.indicators());
            placer.place_fixed(routine, hour, &window);
        }
    }
    // Time-constrained routines spread over their windows.
    for routine in routines {
        let window = slot_window_for(routine.indicators());
        if routine.specific_time().is_none() && !window.is_unconstrained() {
            placer.place_windowed(routine, &window)?;
        }
    }
    // Time-unconstrained routines take leftover capacity.
    for routine in routines {
        let window = slot_window_for(routine.indicators());
        if routine.specific_time().is_none() && window.is_unconstrained() {
            placer.place_unconstrained(routine, &window)?;
        }
    }

    if !placer.over_constrained.is_empty() {
        return Err(Error::Schedule(format!(
            "over-constrained routines cannot be placed: {}",
            placer.over_constrained.join(", ")
        )));
    }
    Ok(placer.timeline)
}

/// Builds a timeline for one user; deterministic in (routines, days, seed).
pub fn schedule(routines: &[Routine], days: usize, seed: u64) -> Result<ScheduleTimeline> {
    schedule_with_rng(routines, days, &mut seed::stream(seed, "schedule"))
}

/// Builds the timeline for one of several synthetic users, each with an
/// independent stream derived from the run seed.
pub fn schedule_user(routines: &[Routine], days: usize, seed: u64, user: u64) -> Result<ScheduleTimeline> {
    schedule_with_rng(routines, days, &mut seed::stream_indexed(seed, "schedule", user))
}

/// Walks the timeline chronologically and emits each instance's trigger tokens
/// then action tokens, in routine-declared order.
pub fn extract_sequence(timeline: &ScheduleTimeline, routines: &[Routine], origin: &str) -> Result<Sequence> {
    let by_id: BTreeMap<&str, &Routine> = routines.iter().map(|r| (r.id(), r)).collect();
    let mut tokens: Vec<EventToken> = Vec::new();
    for (_, _, id) in timeline.placements() {
        let routine = by_id
            .get(id)
            .ok_or_else(|| Error::Schedule(format!("timeline references unknown routine `{id}`")))?;
        tokens.extend(routine.instance_tokens().cloned());
    }
    Sequence::new(tokens, origin)
}
