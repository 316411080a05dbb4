//! Parameter files and tabular output.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::model::ModelParams;
use crate::{Error, Result};

/// Parses a flat `key = value` block. Blank lines and `#` comments are
/// ignored; unspecified keys keep their defaults.
pub fn parse_key_values(text: &str) -> Result<ModelParams> {
    let mut p = ModelParams::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        apply_override(&mut p, line).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
    }
    p.validate()?;
    Ok(p)
}

pub fn parse_params_json(text: &str) -> Result<ModelParams> {
    let p: ModelParams = serde_json::from_str(text)?;
    p.validate()?;
    Ok(p)
}

/// JSON if the text starts with `{`, key=value otherwise.
pub fn parse_params(text: &str) -> Result<ModelParams> {
    if text.trim_start().starts_with('{') {
        parse_params_json(text)
    } else {
        parse_key_values(text)
    }
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    parse_params(&std::fs::read_to_string(path)?)
}

/// Applies one `key=value` assignment.
pub fn apply_override(p: &mut ModelParams, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected key=value, got {assignment:?}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {:?} for {}", value.trim(), key.trim())))?;
    p.set(key.trim(), value)
}

pub fn params_to_key_values(p: &ModelParams) -> String {
    ModelParams::KEYS
        .iter()
        .zip(p.values())
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Named real columns sharing one row index, plus free-form metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Map<String, Value>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        debug_assert!(self.columns.first().is_none_or(|(_, c)| c.len() == values.len()));
        self.columns.push((name.to_string(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    /// Header row then one line per row; metadata is not included.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for i in 0..self.rows() {
            for (k, (_, col)) in self.columns.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:?}", col[i]);
            }
            out.push('\n');
        }
        out
    }

    /// `{"meta": {...}, "series": {name: [...], ...}}`
    pub fn to_json(&self) -> Value {
        let series: Map<String, Value> =
            self.columns.iter().map(|(n, c)| (n.clone(), Value::from(c.clone()))).collect();
        let mut root = Map::new();
        root.insert("meta".into(), Value::Object(self.meta.clone()));
        root.insert("series".into(), Value::Object(series));
        Value::Object(root)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(&self.to_json())? + "\n",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_with_comments() {
        let p = parse_key_values("# fig\nomega1 = 1.5\n\ngamma_x=0.25 # coupling\n").unwrap();
        assert_eq!(p.omega1, 1.5);
        assert_eq!(p.gamma_x, 0.25);
        assert_eq!(p.hbar, 1.0);
    }

    #[test]
    fn key_values_errors() {
        assert!(parse_key_values("omega3 = 1").is_err());
        assert!(parse_key_values("omega1 1").is_err());
        assert!(parse_key_values("hbar = -1").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let p = ModelParams { omega1: 0.5, gamma_yx: -0.25, ..Default::default() };
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(parse_params(&text).unwrap(), p);
        assert!(parse_params("{\"omega9\": 1}").is_err());
        assert_eq!(parse_params("{\"gamma_z\": 2}").unwrap().gamma_z, 2.0);
    }

    #[test]
    fn key_value_roundtrip() {
        let p = ModelParams { omega2: -0.125, gamma_xy: 3.0, ..Default::default() };
        assert_eq!(parse_key_values(&params_to_key_values(&p)).unwrap(), p);
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new().meta("figure", 2);
        t.push("tau", vec![0.0, 0.5]);
        t.push("Sz", vec![1.0, -0.25]);
        assert_eq!(t.to_csv(), "tau,Sz\n0.0,1.0\n0.5,-0.25\n");
        let j = t.to_json();
        assert_eq!(j["meta"]["figure"], 2);
        assert_eq!(j["series"]["Sz"][1], -0.25);
        let keys: Vec<&String> = j.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["meta", "series"]);
    }
}
