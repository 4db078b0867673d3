use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const TOOL: &str = "mld-gap-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
    Table,
}

/// Output of one subcommand before rendering.
#[derive(Debug, Default)]
pub struct Report {
    pub records: Vec<Value>,
    pub summary: Map<String, Value>,
    pub anomalies: u64,
    /// One-line answer printed when no format is requested.
    pub text: Option<String>,
}

impl Report {
    pub fn push<T: Serialize>(&mut self, record: &T) {
        self.records
            .push(serde_json::to_value(record).expect("records serialize to JSON"));
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("summary values serialize to JSON"),
        );
    }
}

pub fn header(config: &Value) -> Value {
    json!({"tool": TOOL, "version": VERSION, "config": config})
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn columns(records: &[Value]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in records {
        match r {
            Value::Object(m) => {
                for k in m.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            _ => {
                if !cols.iter().any(|c| c == "value") {
                    cols.push("value".into());
                }
            }
        }
    }
    cols
}

fn row(record: &Value, cols: &[String]) -> Vec<String> {
    cols.iter()
        .map(|c| match record {
            Value::Object(m) => m.get(c).map(cell).unwrap_or_default(),
            other => cell(other),
        })
        .collect()
}

pub fn render(report: &Report, config: &Value, format: Option<Format>) -> String {
    let Some(format) = format else {
        if let Some(text) = &report.text {
            return format!("{text}\n");
        }
        return render(report, config, Some(Format::Jsonl));
    };
    let head = header(config);
    let summary = Value::Object(report.summary.clone());
    let mut out = String::new();
    match format {
        Format::Jsonl => {
            writeln!(out, "{head}").unwrap();
            for r in &report.records {
                writeln!(out, "{r}").unwrap();
            }
            writeln!(out, "{}", json!({ "summary": summary })).unwrap();
        }
        Format::Csv => {
            writeln!(out, "# {head}").unwrap();
            let cols = columns(&report.records);
            if !cols.is_empty() {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&cols).unwrap();
                for r in &report.records {
                    w.write_record(row(r, &cols)).unwrap();
                }
                out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
            }
            writeln!(out, "# summary {summary}").unwrap();
        }
        Format::Table => {
            writeln!(out, "# {head}").unwrap();
            let cols = columns(&report.records);
            if !cols.is_empty() {
                let rows: Vec<Vec<String>> = report.records.iter().map(|r| row(r, &cols)).collect();
                let widths: Vec<usize> = cols
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        rows.iter()
                            .map(|r| r[i].chars().count())
                            .max()
                            .unwrap_or(0)
                            .max(c.chars().count())
                    })
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                writeln!(out, "{}", line(&cols)).unwrap();
                for r in &rows {
                    writeln!(out, "{}", line(r)).unwrap();
                }
            }
            for (k, v) in &report.summary {
                writeln!(out, "{k}: {}", cell(v)).unwrap();
            }
        }
    }
    out
}
