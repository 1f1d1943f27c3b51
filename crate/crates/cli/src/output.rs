use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Json,
    Csv,
}

/// One report together with the resolved configuration that produced it.
#[derive(Debug, Serialize)]
pub struct Record {
    pub command: &'static str,
    pub config: Value,
    pub report: Value,
    #[serde(skip)]
    pub converged: bool,
}

impl Record {
    pub fn new(command: &'static str, config: &impl Serialize, report: &impl Serialize, converged: bool) -> Self {
        Record {
            command,
            config: serde_json::to_value(config).expect("config serializes"),
            report: serde_json::to_value(report).expect("report serializes"),
            converged,
        }
    }
}

/// Dotted-key flattening: `{"a": {"b": [1, 2]}}` → `a.b.0`, `a.b.1`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn record_value(r: &Record) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::String(r.command.into()));
    m.insert("config".into(), r.config.clone());
    m.insert("report".into(), r.report.clone());
    Value::Object(m)
}

pub fn write(records: &[Record], format: Format, mut out: impl Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let v = match records {
                [one] => record_value(one),
                many => Value::Array(many.iter().map(record_value).collect()),
            };
            serde_json::to_writer_pretty(&mut out, &v)?;
            writeln!(out)
        }
        Format::Csv => {
            let rows: Vec<Vec<(String, String)>> = records
                .iter()
                .map(|r| {
                    let mut row = Vec::new();
                    flatten("", &record_value(r), &mut row);
                    row
                })
                .collect();
            let mut header: Vec<&str> = Vec::new();
            for row in &rows {
                for (k, _) in row {
                    if !header.contains(&k.as_str()) {
                        header.push(k);
                    }
                }
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for row in &rows {
                w.write_record(header.iter().map(|h| {
                    row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())
                }))?;
            }
            w.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening() {
        let mut out = Vec::new();
        flatten("", &json!({"a": {"b": [1, 2]}, "c": null, "d": "x"}), &mut out);
        let keys: Vec<_> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b.0", "a.b.1", "c", "d"]);
        assert_eq!(out[3].1, "x");
    }

    #[test]
    fn csv_one_line_per_record() {
        let recs = [
            Record::new("t", &json!({"alpha": 0.5}), &json!({"finite": true}), true),
            Record::new("t", &json!({"alpha": 2.5}), &json!({"finite": false}), true),
        ];
        let mut buf = Vec::new();
        write(&recs, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines, ["command,config.alpha,report.finite", "t,0.5,true", "t,2.5,false"]);
    }
}
