//! Tabular report emission: CSV for plotting, JSON for machine
//! consumption. Every report embeds the run configuration (including
//! the seed), so re-running a command byte-reproduces the output apart
//! from the timestamp header line.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!(
                "format must be csv or json, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub config: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(title: impl Into<String>, config: &[(&str, String)]) -> Self {
        Report {
            title: title.into(),
            config: config
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&mut self, cols: &[&str]) -> &mut Self {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn push_row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    fn timestamp() -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.title));
        out.push_str(&format!("# generated_unix: {}\n", Self::timestamp()));
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Envelope<'a> {
            generated_unix: u64,
            #[serde(flatten)]
            report: &'a Report,
        }
        serde_json::to_string_pretty(&Envelope {
            generated_unix: Self::timestamp(),
            report: self,
        })
        .expect("report serialization cannot fail")
        + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Write to a file, or stdout when no path is given.
    pub fn write(&self, out: Option<&Path>, format: Format) -> Result<()> {
        let body = self.render(format);
        match out {
            Some(path) => std::fs::write(path, body)?,
            None => std::io::stdout().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

/// Format a float for report cells: full round-trip precision without
/// trailing noise.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", &[("seed", "7".into()), ("n", "3".into())]);
        r.columns(&["k", "value"]);
        r.push_row(vec!["1".into(), fmt_f64(2.0)]);
        r.push_row(vec!["2".into(), fmt_f64(0.5)]);
        r
    }

    #[test]
    fn csv_shape() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# demo"));
        assert!(lines[1].starts_with("# generated_unix:"));
        assert_eq!(lines[4], "k,value");
        assert_eq!(lines[5], "1,2.0");
        assert_eq!(lines[6], "2,0.5");
    }

    #[test]
    fn json_roundtrip() {
        let json = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["title"], "demo");
        assert_eq!(v["config"]["seed"], "7");
        assert_eq!(v["rows"][0][1], "2.0");
    }

    #[test]
    fn byte_reproducible_modulo_timestamp() {
        let a: Vec<String> = sample()
            .to_csv()
            .lines()
            .filter(|l| !l.starts_with("# generated_unix"))
            .map(String::from)
            .collect();
        let b: Vec<String> = sample()
            .to_csv()
            .lines()
            .filter(|l| !l.starts_with("# generated_unix"))
            .map(String::from)
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn format_parse() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
