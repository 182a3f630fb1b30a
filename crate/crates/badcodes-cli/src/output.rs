//! Result tables, the provenance header and CSV export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

/// Column names and rows of formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest decimal text that parses back to the same `f64`; never uses a
/// locale-dependent separator.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// What a command produced: summary lines for stdout and a table for CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub summary: Vec<String>,
    pub table: Table,
}

/// Header lines, each starting with `#`. Only the `timestamp` line varies
/// between identical runs.
pub fn provenance(command: &str, seed: Option<u64>, config: &str, timestamp: u64) -> String {
    let mut out = format!("# badcodes {}\n# command: {command}\n", env!("CARGO_PKG_VERSION"));
    match seed {
        Some(s) => out.push_str(&format!("# seed: {s}\n")),
        None => out.push_str("# seed: none\n"),
    }
    out.push_str(&format!("# timestamp: {timestamp}\n# config:\n"));
    for line in config.lines() {
        out.push_str(&format!("#   {line}\n"));
    }
    out
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes the header followed by the table as CSV.
pub fn write_csv(path: &Path, header: &str, table: &Table) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(header.as_bytes())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
