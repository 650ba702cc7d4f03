//! Rendering of command results as JSON, CSV, or an aligned text table.

use std::io::Write;

use serde_json::Value;

use crate::config::Format;

/// One table cell. Floats are rounded to the requested significant digits
/// when rendered.
#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Float(f64),
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell::Text(x.to_string())
            }
        }
    )*};
}
int_cell!(u32, u64, usize, bool);

/// A command result. `json` is the full structured report; `header` and
/// `rows` its tabular form for CSV; `text`, when set, replaces the aligned
/// table for the `table` format.
pub struct Output {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub text: Option<String>,
}

impl Output {
    pub fn new(json: Value, header: Vec<&'static str>, rows: Vec<Vec<Cell>>) -> Self {
        Self { json, header, rows, text: None }
    }

    pub fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn render(&self, format: Format, digits: usize, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                let v = round_value(&self.json, digits);
                serde_json::to_writer_pretty(&mut *out, &v)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| cell_text(c, digits)))?;
                }
                w.flush()
            }
            Format::Table => match &self.text {
                Some(t) => writeln!(out, "{t}"),
                None => write_aligned(&self.header, &self.rows, digits, out),
            },
        }
    }
}

/// `x` rounded to `digits` significant digits, printed in shortest form.
pub fn sig(x: f64, digits: usize) -> String {
    let r = round(x, digits);
    if r != 0.0 && r.is_finite() && (r.abs() >= 1e16 || r.abs() < 1e-6) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

fn round(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn cell_text(c: &Cell, digits: usize) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Float(x) => sig(*x, digits),
    }
}

fn round_value(v: &Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round(n.as_f64().unwrap_or(0.0), digits);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(|x| round_value(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), round_value(x, digits))).collect()),
        other => other.clone(),
    }
}

fn write_aligned(header: &[&str], rows: &[Vec<Cell>], digits: usize, out: &mut impl Write) -> std::io::Result<()> {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|c| cell_text(c, digits)).collect()).collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &cells {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |out: &mut dyn Write, items: &mut dyn Iterator<Item = &str>| -> std::io::Result<()> {
        let parts: Vec<String> = items.zip(&width).map(|(c, &w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", parts.join("  ").trim_end())
    };
    line(out, &mut header.iter().copied())?;
    for r in &cells {
        line(out, &mut r.iter().map(String::as_str))?;
    }
    Ok(())
}

/// Key/value summary lines, keys padded to a common width.
pub fn summary(pairs: &[(&str, String)]) -> String {
    let w = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs.iter().map(|(k, v)| format!("{k:<w$}  {v}")).collect::<Vec<_>>().join("\n")
}
