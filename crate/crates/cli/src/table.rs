use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn plain(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn rounded(&self, precision: Option<usize>) -> Cell {
        match (self, precision) {
            (Cell::Num(v), Some(p)) if v.is_finite() => Cell::Num(format!("{v:.p$}").parse().expect("formatted float")),
            _ => self.clone(),
        }
    }

    fn csv(&self, precision: Option<usize>) -> String {
        match self {
            Cell::Num(v) => match precision {
                Some(p) if v.is_finite() => format!("{v:.p$}"),
                _ => plain(*v),
            },
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite values become null
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Result of one command: column names, rows and free-form diagnostics.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub diagnostics: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Self { columns, ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    pub fn render(&self, format: Format, precision: Option<usize>, config: &Value) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "# levy-scale {}", env!("CARGO_PKG_VERSION"));
                let _ = writeln!(out, "# config: {config}");
                if !self.diagnostics.is_empty() {
                    let _ = writeln!(out, "# diagnostics: {}", Value::Object(self.diagnostics.clone()));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| c.csv(precision))).expect("in-memory write");
                }
                out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf-8 cells"));
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.clone(), v.rounded(precision).json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut top = Map::new();
                top.insert("version".into(), env!("CARGO_PKG_VERSION").into());
                top.insert("config".into(), config.clone());
                top.insert("rows".into(), Value::Array(rows));
                top.insert("diagnostics".into(), Value::Object(self.diagnostics.clone()));
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

pub fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing to stdout")?;
            Ok(())
        }
    }
}
