//! Tabular results rendered as CSV, JSON lines or `key=value` text.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format `{s}` (expected csv, json-lines or text)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::JsonLines => "json-lines",
            Format::Text => "text",
        })
    }
}

/// Rows under fixed columns, plus trailing summary fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Output {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.push((key.to_string(), value));
    }

    /// CSV with summary fields as trailing `# key=value` comment lines.
    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(cell)).expect("in-memory write");
                }
                out = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
                for (k, v) in &self.summary {
                    out.push_str(&format!("# {k}={}\n", cell(v)));
                }
            }
            Format::JsonLines => {
                for row in &self.rows {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().cloned()).collect();
                    out.push_str(&Value::Object(obj).to_string());
                    out.push('\n');
                }
                if !self.summary.is_empty() {
                    let mut obj = Map::new();
                    obj.insert("summary".into(), Value::Bool(true));
                    obj.extend(self.summary.iter().cloned());
                    out.push_str(&Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
            Format::Text => {
                let mut records: Vec<Vec<(String, String)>> = self
                    .rows
                    .iter()
                    .map(|row| self.columns.iter().cloned().zip(row.iter().map(cell)).collect())
                    .collect();
                if !self.summary.is_empty() {
                    records.push(self.summary.iter().map(|(k, v)| (k.clone(), cell(v))).collect());
                }
                let blocks: Vec<String> = records
                    .iter()
                    .map(|r| r.iter().map(|(k, v)| format!("{k}={v}\n")).collect())
                    .collect();
                out = blocks.join("\n");
            }
        }
        out
    }
}

/// Parses rendered output back into `(key, value)` records; summary fields
/// come last as their own record.
#[cfg(test)]
pub fn parse(text: &str, format: Format) -> Result<Vec<Vec<(String, String)>>, String> {
    match format {
        Format::Csv => {
            let mut body = String::new();
            let mut summary = Vec::new();
            for line in text.lines() {
                match line.strip_prefix("# ") {
                    Some(kv) => {
                        let (k, v) = kv.split_once('=').ok_or("bad summary line")?;
                        summary.push((k.to_string(), v.to_string()));
                    }
                    None => {
                        body.push_str(line);
                        body.push('\n');
                    }
                }
            }
            let mut r = csv::Reader::from_reader(body.as_bytes());
            let headers = r.headers().map_err(|e| e.to_string())?.clone();
            let mut out = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| e.to_string())?;
                out.push(headers.iter().map(String::from).zip(rec.iter().map(String::from)).collect());
            }
            if !summary.is_empty() {
                out.push(summary);
            }
            Ok(out)
        }
        Format::JsonLines => text
            .lines()
            .map(|l| {
                let v: Value = serde_json::from_str(l).map_err(|e| e.to_string())?;
                let obj = v.as_object().ok_or("not an object")?;
                Ok(obj
                    .iter()
                    .filter(|(k, _)| k.as_str() != "summary")
                    .map(|(k, v)| (k.clone(), cell(v)))
                    .collect())
            })
            .collect(),
        Format::Text => text
            .split("\n\n")
            .filter(|b| !b.trim().is_empty())
            .map(|b| {
                b.lines()
                    .map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| format!("bad line `{l}`")))
                    .collect()
            })
            .collect(),
    }
}
