//! `helion schedule` — timeline placement and corpus extraction.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::bail;
use clap::Args;
use helion_core::corpus::corpus_to_string;
use helion_core::routine::read_routines;
use helion_core::schedule::{extract_sequence, schedule_user, DEFAULT_DAYS};

use super::write_output;

#[derive(Args)]
pub struct ScheduleArgs {
    /// Normalized routine file (output of `ingest`).
    #[arg(long)]
    routines: PathBuf,

    /// Timeline horizon in days; day 0 is a Monday.
    #[arg(long, default_value_t = DEFAULT_DAYS)]
    days: usize,

    /// Number of synthetic users; each gets an independent timeline and one
    /// corpus line.
    #[arg(long, default_value_t = 1)]
    users: u64,

    /// Corpus file to write (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also dump every occupied slot as CSV rows.
    #[arg(long)]
    timeline_out: Option<PathBuf>,
}

pub fn run(args: &ScheduleArgs, seed: u64) -> anyhow::Result<()> {
    if args.users == 0 {
        bail!("--users must be at least 1");
    }
    let routines = read_routines(&args.routines)?;
    let mut corpus = Vec::with_capacity(args.users as usize);
    let mut dump = String::from(if args.users > 1 { "user,day,hour,routine_id\n" } else { "day,hour,routine_id\n" });
    for user in 0..args.users {
        let timeline = schedule_user(&routines, args.days, seed, user)?;
        corpus.push(extract_sequence(&timeline, &routines, &format!("user{user}"))?);
        if args.timeline_out.is_some() {
            for (day, hour, id) in timeline.placements() {
                if args.users > 1 {
                    let _ = writeln!(dump, "{user},{day},{hour},{id}");
                } else {
                    let _ = writeln!(dump, "{day},{hour},{id}");
                }
            }
        }
    }
    if let Some(path) = &args.timeline_out {
        std::fs::write(path, &dump)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    }
    write_output(args.out.as_deref(), &corpus_to_string(&corpus))
}
