//! Deterministic CSV/JSON writers.

use std::fmt::Write as _;
use std::path::Path;

use lmglab::spectra::Peak;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    /// Numeric table from equally long columns.
    pub fn from_columns(header: &[&'static str], cols: &[&[f64]]) -> Self {
        let len = cols.first().map_or(0, |c| c.len());
        debug_assert!(cols.iter().all(|c| c.len() == len));
        let rows = (0..len).map(|i| cols.iter().map(|c| Cell::Num(c[i])).collect()).collect();
        Table { header: header.to_vec(), rows }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    /// Column-major JSON object, keys in header order.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (j, name) in self.header.iter().enumerate() {
            m.insert(name.to_string(), Value::Array(self.rows.iter().map(|r| r[j].json()).collect()));
        }
        Value::Object(m)
    }
}

/// Where a run writes; records file names relative to the directory.
#[derive(Debug)]
pub struct Sink<'a> {
    pub dir: &'a Path,
    pub format: Format,
    pub files: Vec<String>,
}

impl<'a> Sink<'a> {
    pub fn new(dir: &'a Path, format: Format) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Sink { dir, format, files: Vec::new() })
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json` per the run format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.raw(&format!("{stem}.csv"), &table.to_csv()),
            Format::Json => self.json(&format!("{stem}.json"), &table.to_json()),
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.raw(name, &text)
    }

    pub fn raw(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakOut {
    pub freq_over_nu: f64,
    pub height: f64,
}

pub fn peaks_out(peaks: &[Peak]) -> Vec<PeakOut> {
    peaks.iter().map(|p| PeakOut { freq_over_nu: p.freq_over_nu, height: p.height }).collect()
}

/// Per-run summary. Fields that do not apply to a subcommand are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub n: usize,
    pub h: f64,
    pub gamma: f64,
    pub g: Option<f64>,
    pub m0: Option<f64>,
    pub nu: f64,
    pub omega0: Option<f64>,
    pub mode: Option<String>,
    pub delta_e: Option<f64>,
    pub peaks: Vec<PeakOut>,
    pub files: Vec<String>,
    /// Subcommand-specific results.
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_lf_and_seventeen_digits() {
        let t = Table::from_columns(&["t", "x"], &[&[0.0, 0.1], &[1.0 / 3.0, -2.5]]);
        let s = t.to_csv();
        assert_eq!(s, "t,x\n0.0000000000000000e0,3.3333333333333331e-1\n1.0000000000000001e-1,-2.5000000000000000e0\n");
        let parsed: f64 = s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn json_is_column_major() {
        let mut t = Table::new(&["h", "mode"]);
        t.push(vec![0.5.into(), "round".to_string().into()]);
        assert_eq!(t.to_json(), json!({"h": [0.5], "mode": ["round"]}));
    }
}
