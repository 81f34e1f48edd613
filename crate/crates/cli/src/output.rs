//! CSV and JSON rendering with 17 significant digits.

use serde_json::{Map, Number, Value};

use crate::config::RunConfig;

/// `d.dddddddddddddddde±x`, `nan`, `inf` or `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((mant, exp)) if !exp.starts_with('-') => format!("{mant}e+{exp}"),
            _ => s,
        }
    }
}

/// JSON number carrying the 17-digit text verbatim; non-finite values
/// become null.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

pub fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json_f64(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
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

impl From<i32> for Cell {
    fn from(i: i32) -> Self {
        Cell::Int(i64::from(i))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

/// A column table plus free-form notes that go into the header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.notes.push((key.into(), value));
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut out = config_comment(cfg);
        for (k, v) in &self.notes {
            out.push_str(&format!("# note {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let mut doc = envelope(cfg);
        let notes: Map<String, Value> = self.notes.iter().cloned().collect();
        doc.insert("notes".into(), Value::Object(notes));
        doc.insert("columns".into(), self.columns.iter().map(|c| Value::from(*c)).collect());
        doc.insert(
            "rows".into(),
            self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect(),
        );
        render_json(doc)
    }
}

/// Header lines carrying the resolved configuration.
pub fn config_comment(cfg: &RunConfig) -> String {
    let mut out = format!("# dicke {}\n", cfg.subcommand.name());
    for (k, v) in cfg.entries() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// Top-level JSON object with the command and the resolved configuration.
pub fn envelope(cfg: &RunConfig) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("command".into(), Value::from(cfg.subcommand.name()));
    let config: Map<String, Value> = cfg.entries().map(|(k, v)| (k.to_string(), Value::from(v))).collect();
    doc.insert("config".into(), Value::Object(config));
    doc
}

pub fn render_json(doc: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e+0");
        assert_eq!(fmt_f64(6.02e23), "6.0200000000000000e+23");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_keeps_the_digits() {
        let v = json_f64(1.0 / 3.0);
        assert_eq!(serde_json::to_string(&v).unwrap(), "3.3333333333333331e-1");
        assert_eq!(json_f64(f64::INFINITY), Value::Null);
    }
}
