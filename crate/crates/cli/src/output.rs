//! Atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::ledger::{series_csv, to_csv, to_json};
use crate::run::RunOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn ledger(self, rows: &[crate::ledger::LedgerRow]) -> String {
        match self {
            Format::Csv => to_csv(rows),
            Format::Json => to_json(rows),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn json_string<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Writes `ledger.{csv,json}`, `summary.json` and one `series/<column>.csv`
/// per requested output; returns the written paths.
pub fn write_run(dir: &Path, outcome: &RunOutcome, outputs: &[String], format: Format) -> CliResult<Vec<PathBuf>> {
    let rows = &outcome.simulation.rows;
    let mut written = Vec::new();
    let ledger = dir.join(format!("ledger.{}", format.extension()));
    write_atomic(&ledger, format.ledger(rows).as_bytes())?;
    written.push(ledger);
    let summary = dir.join("summary.json");
    write_atomic(&summary, json_string(&outcome.summary).as_bytes())?;
    written.push(summary);
    for column in outputs {
        let path = dir.join("series").join(format!("{column}.csv"));
        write_atomic(&path, series_csv(rows, column).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
