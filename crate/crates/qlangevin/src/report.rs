//! CSV tables and JSON reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::CliError;

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| CliError::Input(format!("csv buffer: {e}")))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        serde_json::json!({ "columns": self.header, "rows": rows })
    }
}

/// What a command produced: an optional table, a JSON report mirroring it,
/// and the reason the run missed its tolerance, if it did.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Option<Table>,
    pub json: Map<String, Value>,
    pub failure: Option<String>,
}

impl Report {
    pub fn new(table: Option<Table>, json: Map<String, Value>, failure: Option<String>) -> Self {
        Report { table, json, failure }
    }

    /// The report with the table mirrored under `"table"`.
    pub fn json_text(&self) -> String {
        let mut json = self.json.clone();
        if let Some(t) = &self.table {
            json.insert("table".into(), t.to_json());
        }
        let mut s = serde_json::to_string_pretty(&json).expect("report values serialize");
        s.push('\n');
        s
    }

    /// Path of the JSON report that accompanies a table at `out`.
    pub fn sidecar(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".json");
        PathBuf::from(name)
    }

    /// Writes the table to `out` and the report to `<out>.json`, or the
    /// report alone to `out` when there is no table.
    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let write = |path: &Path, bytes: &[u8]| {
            fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
        };
        match &self.table {
            Some(t) => {
                write(out, &t.to_csv()?)?;
                write(&Self::sidecar(out), self.json_text().as_bytes())
            }
            None => write(out, self.json_text().as_bytes()),
        }
    }
}
