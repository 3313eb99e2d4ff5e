//! `helion ingest` — routine validation and normalization.

use std::path::PathBuf;

use anyhow::bail;
use clap::Args;
use helion_core::routine::{ingest, read_raw_routines, routines_to_string, AbstractionMap, DeviceMap, SynonymTable};

use super::write_output;

#[derive(Args)]
pub struct IngestArgs {
    /// Raw routine descriptions (JSON array).
    #[arg(long)]
    routines: PathBuf,

    /// Synonym table mapping paraphrases to canonical segments (JSON object).
    #[arg(long)]
    synonyms: Option<PathBuf>,

    /// Numeric-attribute abstraction map; a built-in temperature map applies
    /// when omitted.
    #[arg(long)]
    abstraction: Option<PathBuf>,

    /// Device capability declarations; when given, unknown attributes are
    /// reported as errors.
    #[arg(long)]
    devices: Option<PathBuf>,

    /// Normalized routine file to write (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &IngestArgs) -> anyhow::Result<()> {
    let raws = read_raw_routines(&args.routines)?;
    let synonyms = match &args.synonyms {
        Some(p) => SynonymTable::load(p)?,
        None => SynonymTable::default(),
    };
    let abstraction = match &args.abstraction {
        Some(p) => AbstractionMap::load(p)?,
        None => AbstractionMap::default_map(),
    };
    let devices = args.devices.as_ref().map(|p| DeviceMap::load(p)).transpose()?;

    let outcome = ingest(&raws, &abstraction, &synonyms, devices.as_ref());
    for d in &outcome.diagnostics {
        eprintln!("{}: {}", d.severity, d.message);
    }
    if outcome.has_errors() {
        bail!("routine ingestion failed");
    }
    write_output(args.out.as_deref(), &routines_to_string(&outcome.routines))
}
