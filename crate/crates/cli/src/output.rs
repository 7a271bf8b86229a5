//! Fixed-format CSV and JSON writers.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Significant digits of every float written.
pub const SIG_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn opt_float(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }

    pub fn opt_int(v: Option<u32>) -> Self {
        v.map_or(Cell::Empty, |n| Cell::Int(n as u64))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(n) => Value::from(*n),
            // non-finite values have no JSON number form
            Cell::Float(x) if !x.is_finite() => Value::Null,
            Cell::Float(x) => Value::from(format_float(*x).parse::<f64>().expect("round trip")),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// Scientific notation with [`SIG_DIGITS`] significant digits, e.g. `2.50000000000e-1`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{:.*e}", SIG_DIGITS - 1, x)
    }
}

/// Rows under a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

fn row_objects(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .header
                .iter()
                .zip(row)
                .map(|(h, c)| (h.to_string(), c.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

pub fn config_value(config: &RunConfig) -> Value {
    serde_json::to_value(config).expect("config is plain data")
}

pub fn write_json<W: Write>(config: &RunConfig, table: &Table, mut out: W) -> Result<(), CliError> {
    let mut doc = Map::new();
    doc.insert("config".into(), config_value(config));
    doc.insert("rows".into(), row_objects(table));
    serde_json::to_writer_pretty(&mut out, &Value::Object(doc))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report<W: Write>(
    config: &RunConfig,
    report: Map<String, Value>,
    mut out: W,
) -> Result<(), CliError> {
    let mut doc = Map::new();
    doc.insert("config".into(), config_value(config));
    doc.extend(report);
    serde_json::to_writer_pretty(&mut out, &Value::Object(doc))?;
    writeln!(out)?;
    Ok(())
}

/// JSON number with the same rounding as the CSV writer.
pub fn json_float(x: f64) -> Value {
    Cell::Float(x).json()
}
