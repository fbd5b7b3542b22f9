//! Result tables in CSV or JSON-lines form.
//!
//! CSV files start with one comment line carrying the config hash and tool
//! version, followed by the header. JSON-lines records carry the same two
//! values as `config_hash` and `tool_version` fields.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::Format;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

pub fn write_table<W: Write>(
    table: &Table,
    format: Format,
    config_hash: &str,
    out: W,
) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(table, config_hash, out),
        Format::Jsonl => write_jsonl(table, config_hash, out),
    }
}

fn write_csv<W: Write>(table: &Table, config_hash: &str, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# config_hash={config_hash} tool_version={TOOL_VERSION}"
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    w.flush()
}

fn write_jsonl<W: Write>(table: &Table, config_hash: &str, mut out: W) -> std::io::Result<()> {
    for row in &table.rows {
        let mut m = Map::new();
        for (k, v) in table.header.iter().zip(row) {
            m.insert((*k).to_string(), v.json());
        }
        m.insert("config_hash".into(), Value::from(config_hash));
        m.insert("tool_version".into(), Value::from(TOOL_VERSION));
        serde_json::to_writer(&mut out, &m)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Config hashes embedded in a result file, one per record for JSON lines.
pub fn embedded_hashes(text: &str) -> Vec<String> {
    if let Some(first) = text.lines().next() {
        if let Some(rest) = first.strip_prefix("# config_hash=") {
            return vec![rest.split_whitespace().next().unwrap_or("").to_string()];
        }
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str::<Value>(l)
                .ok()
                .and_then(|v| {
                    v.get("config_hash")
                        .and_then(Value::as_str)
                        .map(str::to_string)
                })
                .unwrap_or_default()
        })
        .collect()
}

/// Checks that every record in `text` was produced from a config with `hash`.
pub fn verify(text: &str, hash: &str) -> Result<(), String> {
    let found = embedded_hashes(text);
    if found.is_empty() {
        return Err("result file carries no config hash".into());
    }
    match found.iter().find(|h| h.as_str() != hash) {
        Some(bad) => Err(format!(
            "config hash mismatch: file has {bad:?}, config gives {hash}"
        )),
        None => Ok(()),
    }
}

/// Data rows of a CSV result, without the comment and header lines.
pub fn csv_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}
