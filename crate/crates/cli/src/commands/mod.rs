//! One module per subcommand, plus shared output plumbing.

pub mod check;
pub mod entropy;
pub mod extract;
pub mod generate;
pub mod ingest;
pub mod schedule;
pub mod train;

use std::path::Path;

use anyhow::Context;

/// Writes to the given path, or to standard output when none was given.
pub fn write_output(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
