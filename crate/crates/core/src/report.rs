//! Tabular reports rendered as JSON, CSV or Markdown from the same rows.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            _ => Err(Error::Unknown {
                kind: "format",
                value: s.to_string(),
            }),
        }
    }
}

/// Rounds to the 6 decimals every report prints.
pub fn round6(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e6).round() / 1e6
    } else {
        x
    }
}

/// An ordered key/value record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportRow(Map<String, Value>);

impl ReportRow {
    pub fn new() -> Self {
        Self::default()
    }

    /// Flattens any struct that serializes to a JSON object. Nested values
    /// are kept as compact JSON text.
    pub fn from_serialize<T: Serialize>(value: &T) -> Result<Self> {
        match serde_json::to_value(value).map_err(|e| Error::Unknown {
            kind: "row",
            value: e.to_string(),
        })? {
            Value::Object(map) => Ok(ReportRow(
                map.into_iter()
                    .map(|(k, v)| match v {
                        Value::Object(_) | Value::Array(_) => (k, Value::String(v.to_string())),
                        Value::Number(_) => {
                            let f = v.as_f64().unwrap_or(f64::NAN);
                            (k, if v.is_f64() { number(f) } else { v })
                        }
                        other => (k, other),
                    })
                    .collect(),
            )),
            other => Err(Error::Unknown {
                kind: "row",
                value: other.to_string(),
            }),
        }
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.0.insert(key.into(), Value::String(v.into()));
        self
    }

    pub fn int(mut self, key: &str, v: i64) -> Self {
        self.0.insert(key.into(), Value::from(v));
        self
    }

    /// A real printed at 6 decimals; non-finite values print as text.
    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.into(), number(v));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.0.insert(key.into(), Value::Bool(v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }
}

fn number(v: f64) -> Value {
    match serde_json::Number::from_f64(round6(v)) {
        Some(n) => Value::Number(n),
        None if v > 0.0 => Value::String("inf".into()),
        None if v < 0.0 => Value::String("-inf".into()),
        None => Value::String("nan".into()),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

/// Parses a CSV cell back into the JSON value it was printed from.
fn uncell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    match serde_json::from_str::<Value>(s) {
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => {
            if let Some(f) = v.as_f64().filter(|_| s.contains('.')) {
                number(f)
            } else {
                v
            }
        }
        _ => Value::String(s.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        Report { rows }
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for row in &self.rows {
            for k in row.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Markdown => self.to_markdown(),
        }
    }

    pub fn to_json(&self) -> String {
        let arr: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(r.0.clone()))
            .collect();
        let mut s = serde_json::to_string_pretty(&arr).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&cols).expect("in-memory write");
        for row in &self.rows {
            w.write_record(
                cols.iter()
                    .map(|c| row.get(c).map(cell).unwrap_or_default()),
            )
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let cols = self.columns();
        let mut out = format!("| {} |\n", cols.join(" | "));
        out += &format!("|{}\n", "---|".repeat(cols.len()));
        for row in &self.rows {
            let cells: Vec<String> = cols
                .iter()
                .map(|c| row.get(c).map(cell).unwrap_or_default().replace('|', "\\|"))
                .collect();
            out += &format!("| {} |\n", cells.join(" | "));
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: String| Error::Unknown {
            kind: "json report",
            value: e,
        };
        let arr: Vec<Map<String, Value>> =
            serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        Ok(Report::new(arr.into_iter().map(ReportRow).collect()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |e: csv::Error| Error::Unknown {
            kind: "csv report",
            value: e.to_string(),
        };
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(bad)?.clone();
        let rows = r
            .records()
            .map(|rec| {
                let rec = rec.map_err(bad)?;
                Ok(ReportRow(
                    headers
                        .iter()
                        .zip(rec.iter())
                        .map(|(k, v)| (k.to_string(), uncell(v)))
                        .collect(),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Report::new(rows))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::new(vec![
            ReportRow::new()
                .text("method", "adams")
                .int("M", 10)
                .num("value", 0.380_158_730_158)
                .flag("ok", true),
            ReportRow::new()
                .text("method", "hh, dean")
                .int("M", 20)
                .num("value", 0.5)
                .flag("ok", false),
        ])
    }

    #[test]
    fn formats_carry_the_same_numbers() {
        let r = sample();
        assert!(r.to_json().contains("0.380159"));
        assert!(r.to_csv().contains("0.380159"));
        assert!(r.to_markdown().contains("0.380159"));
        assert!(r.to_csv().contains("0.500000"));
        assert!(r.to_markdown().contains("0.500000"));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(Report::from_csv(&r.to_csv()).unwrap(), r);
        let with_null = Report::new(vec![ReportRow::new().text("a", "x").num("b", f64::NAN)]);
        let mut row = with_null.rows[0].clone();
        row.0.insert("c".into(), Value::Null);
        let r = Report::new(vec![row]);
        assert_eq!(Report::from_csv(&r.to_csv()).unwrap(), r);
    }

    #[test]
    fn structs_flatten() {
        #[derive(Serialize)]
        struct Row {
            a: f64,
            b: Option<u32>,
            c: [f64; 2],
        }
        let row = ReportRow::from_serialize(&Row {
            a: 1.0 / 3.0,
            b: None,
            c: [0.0, 1.0],
        })
        .unwrap();
        assert_eq!(row.get("a").unwrap().as_f64(), Some(0.333333));
        assert_eq!(row.get("b"), Some(&Value::Null));
        assert_eq!(row.get("c").unwrap().as_str(), Some("[0.0,1.0]"));
        assert_eq!(number(f64::INFINITY), Value::String("inf".into()));
    }
}
