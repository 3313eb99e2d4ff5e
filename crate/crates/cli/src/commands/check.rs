//! `helion check` — policy replay over scenario files.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, ValueEnum};
use helion_core::corpus::read_corpus;
use helion_core::snapshot::{check, load_policies, render_report};

use super::write_output;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable report.
    Text,
    /// One JSON record per violation.
    Records,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Scenario file: one scenario per line in corpus wire format.
    #[arg(long)]
    scenario: PathBuf,

    /// Policy pack, one JSON policy per line.
    #[arg(long)]
    policies: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Returns whether any violation was found (exit status 1).
pub fn run(args: &CheckArgs) -> anyhow::Result<bool> {
    let scenarios = read_corpus(&args.scenario)?;
    if scenarios.is_empty() {
        bail!("{}: no scenarios found", args.scenario.display());
    }
    let policies = load_policies(&args.policies)?;
    let mut out = String::new();
    let mut any = false;
    for (i, scenario) in scenarios.iter().enumerate() {
        let violations = check(scenario.tokens(), &policies);
        any |= !violations.is_empty();
        match args.format {
            Format::Text => {
                if scenarios.len() > 1 {
                    let _ = writeln!(out, "# scenario {i}");
                }
                out.push_str(&render_report(&violations));
            }
            Format::Records => {
                for v in &violations {
                    let mut record = serde_json::to_value(v)?;
                    record["scenario"] = serde_json::Value::from(i);
                    let _ = writeln!(out, "{record}");
                }
            }
        }
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(any)
}
