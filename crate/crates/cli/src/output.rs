//! Tables with a reproducibility header, rendered as CSV or JSON.

use serde::Serialize;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use tensorpow::{BigCount, Dd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Cell {
    /// Natural log; 17 significant digits in CSV.
    Log(f64),
    /// Linear value; shortest round-trip form.
    Lin(f64),
    Count(BigCount),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn log(x: Dd) -> Cell {
        Cell::Log(x.to_f64())
    }

    /// `exp(x)` as a linear cell.
    pub fn exp(x: Dd) -> Cell {
        Cell::Lin(x.exp().to_f64())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Log(x) if x.is_finite() => format!("{:.16e}", x + 0.0),
            Cell::Log(x) | Cell::Lin(x) => float_text(*x),
            Cell::Count(c) => c.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => csv_escape(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Log(x) | Cell::Lin(x) if x.is_finite() => json!(x),
            Cell::Log(x) | Cell::Lin(x) => json!(float_text(*x)),
            Cell::Count(c) => json!(c.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{}", x + 0.0)
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One command's output: header block, columns and rows.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    /// Extra header entries, e.g. verdicts or summary counts.
    pub meta: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new<S: Into<String>>(command: &'static str, config: Value, columns: Vec<S>) -> Self {
        let columns = columns.into_iter().map(Into::into).collect();
        Report { command, config, meta: Map::new(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.meta.insert(key.to_string(), v);
    }

    fn header(&self) -> Value {
        json!({
            "tool": "tensorpow",
            "version": env!("CARGO_PKG_VERSION"),
            "library_version": tensorpow::VERSION,
            "command": self.command,
            "config": self.config,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let header = self.header();
        for (k, v) in header.as_object().into_iter().flatten().chain(&self.meta) {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            for line in text.lines() {
                let _ = writeln!(out, "# {k}: {line}");
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.clone(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("header".into(), self.header());
        for (k, v) in &self.meta {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("columns".into(), json!(self.columns));
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialize");
        s.push('\n');
        s
    }
}
