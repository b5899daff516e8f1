use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bellcat_core::dynamics::Timescales;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV table held in memory until written.
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, dir: &Path) -> CliResult<EmittedFile> {
        let mut w =
            csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(dir.join(&self.name))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(EmittedFile { name: self.name.clone(), rows: self.rows.len() })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmittedFile {
    pub name: String,
    pub rows: usize,
}

/// Result of one command: its tables plus scalar figures of merit.
#[derive(Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, f64>,
    pub timescales: Option<Timescales>,
}

impl Artifacts {
    pub fn note(&mut self, key: &str, value: f64) {
        self.summary.insert(key.into(), value);
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub wall_clock_seconds: f64,
    pub files: Vec<EmittedFile>,
    pub summary: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timescales: Option<Timescales>,
    pub error: Option<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(-71.4142842854285).parse::<f64>().unwrap(), -71.4142842854285);
    }
}
