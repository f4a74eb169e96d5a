//! CSV and JSON emission with a configuration header.
//!
//! CSV output starts with `# key=value` comment lines, then a header row and
//! one record per cell. JSON output is a single object with `config`, `cells`
//! and `summary`.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

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
            _ => Err(invalid(format!("unknown output format '{s}'"))),
        }
    }
}

/// Ordered `key=value` pairs describing a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunHeader(Vec<(String, String)>);

impl RunHeader {
    pub fn new(command: &str) -> Self {
        let mut h = Self::default();
        h.push("command", command);
        h.push("version", env!("CARGO_PKG_VERSION"));
        h
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn list<T: ToString>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.push(key, joined.join(","))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }
}

impl Serialize for RunHeader {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut out: W, header: &RunHeader, rows: &[T]) -> Result<()> {
    for (k, v) in header.entries() {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a, T, S> {
    config: &'a RunHeader,
    cells: &'a [T],
    summary: &'a S,
}

pub fn write_json<W: Write, T: Serialize, S: Serialize>(
    mut out: W,
    header: &RunHeader,
    rows: &[T],
    summary: &S,
) -> Result<()> {
    let r = JsonReport {
        config: header,
        cells: rows,
        summary,
    };
    serde_json::to_writer_pretty(&mut out, &r)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report<W: Write, T: Serialize, S: Serialize>(
    out: W,
    format: Format,
    header: &RunHeader,
    rows: &[T],
    summary: &S,
) -> Result<()> {
    match format {
        Format::Csv => write_csv(out, header, rows),
        Format::Json => write_json(out, header, rows, summary),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        t: f64,
        value: f64,
    }

    #[test]
    fn csv_has_header_block_and_rows() {
        let mut h = RunHeader::new("kernel");
        h.push("q", 2).list("t", &[1.0, 4.0]);
        let rows = [Row { t: 1.0, value: 1e-12 }, Row { t: 4.0, value: 0.5 }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &h, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# command=kernel");
        assert!(lines.contains(&"# t=1,4"));
        assert!(lines.contains(&"t,value"));
        assert!(lines.contains(&"1.0,1e-12"));
    }

    #[test]
    fn json_has_three_sections() {
        let h = RunHeader::new("sweep");
        let mut buf = Vec::new();
        write_json(&mut buf, &h, &[Row { t: 1.0, value: 2.0 }], &"ok").unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["config"]["command"], "sweep");
        assert_eq!(v["cells"][0]["value"], 2.0);
        assert_eq!(v["summary"], "ok");
    }
}
