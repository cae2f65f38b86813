//! Report records and their JSON / CSV emission.
//!
//! Floats are written in their shortest round-trip form (exponent notation
//! outside `[1e-5, 1e16)`) with `.` as the decimal separator, so identical inputs give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::OutputFormat;
use crate::{Error, Result};

/// A named residual with the tolerance it is certified against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Certificate {
    /// Passes when `value ≤ tol`.
    pub fn at_most(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value <= tol }
    }

    /// Passes when `value ≥ −tol`.
    pub fn nonnegative(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value >= -tol }
    }

    /// A boolean check reported as 0/1.
    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tol: 0.0, pass: ok }
    }
}

/// Rows of numbers (or strings) under a header.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub kind: String,
    pub pass: bool,
    pub certificates: Vec<Certificate>,
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// Emit `data` alone instead of the full record.
    #[serde(skip)]
    pub raw: bool,
}

impl Report {
    pub fn new(kind: &str, certificates: Vec<Certificate>, data: Value) -> Self {
        let pass = certificates.iter().all(|c| c.pass);
        Self { kind: kind.into(), pass, certificates, data, table: None, raw: false }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = if self.raw { serde_json::to_string_pretty(&self.data)? } else { serde_json::to_string_pretty(self)? };
        text.push('\n');
        Ok(text)
    }

    /// The table when present, otherwise one row naming every certificate.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        match &self.table {
            Some(t) => {
                w.write_record(&t.header)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(cell))?;
                }
            }
            None => {
                let mut header: Vec<String> = self.certificates.iter().map(|c| c.name.clone()).collect();
                header.push("pass".into());
                w.write_record(&header)?;
                let mut row: Vec<String> = self.certificates.iter().map(|c| format!("{:?}", c.value)).collect();
                row.push(self.pass.to_string());
                w.write_record(&row)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| format!("{x:?}")),
        other => other.to_string(),
    }
}

/// Writes `report` to `out`, or to stdout when `out` is absent.
pub fn emit_report(report: &Report, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// A float as a JSON number, or `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_has_header_only() {
        let r = Report::new("walk-converge", vec![], Value::Null).with_table(Table {
            header: vec!["h".into(), "err".into(), "ratio".into()],
            rows: vec![],
        });
        assert_eq!(r.to_csv().unwrap(), "h,err,ratio\n");
    }

    #[test]
    fn certificates_become_one_row() {
        let r = Report::new(
            "validate",
            vec![Certificate::at_most("unit", 0.1, 1e-9), Certificate::at_most("counit", 0.0, 1e-9)],
            Value::Null,
        );
        assert!(!r.pass);
        assert_eq!(r.to_csv().unwrap(), "unit,counit,pass\n0.1,0.0,false\n");
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let r = Report::new("x", vec![], Value::Null)
            .with_table(Table { header: vec!["v".into()], rows: vec![vec![num(x)]] });
        let csv = r.to_csv().unwrap();
        let parsed: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, x);
    }
}
