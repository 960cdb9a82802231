//! Result tables and the files they are written to.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::CliResult;

/// Rows of a results table; cells are JSON numbers or strings.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// What an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub table: Table,
    /// Extra structured results, emitted with `--format json`.
    pub details: Value,
    pub checks: Vec<Check>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// The output document, headed by the library version and config hash.
pub fn render(outcome: &Outcome, format: Format, hash: &str) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# frechet {} config {hash}", frechet::VERSION)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&outcome.table.columns).map_err(std::io::Error::other)?;
            for row in &outcome.table.rows {
                w.write_record(row.iter().map(cell_text)).map_err(std::io::Error::other)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "version": frechet::VERSION,
                "config_hash": hash,
                "rows": outcome.table.records(),
                "details": outcome.details,
                "checks": outcome.checks,
            });
            serde_json::to_writer_pretty(&mut buf, &doc).map_err(std::io::Error::other)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn write(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}
