use std::fmt::Write as _;
use std::io::{self, Write};

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    JsonLines,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v.into())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

/// Formats like C's `%.12g`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Value {
    fn plain(&self) -> String {
        match self {
            Value::Num(x) => fmt_num(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Num(x) if x.is_finite() => fmt_num(*x),
            Value::Num(_) | Value::Missing => "null".into(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => serde_json::Value::from(s.as_str()).to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Writes the tables in the requested format. In csv and json-lines output
/// every row carries the table name in a leading `table` field.
pub fn render<W: Write>(tables: &[Table], format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Table => render_text(tables, out),
        Format::JsonLines => render_json_lines(tables, out),
        Format::Csv => render_csv(tables, out),
    }
}

fn render_text<W: Write>(tables: &[Table], mut out: W) -> io::Result<()> {
    for (k, t) in tables.iter().enumerate() {
        if k > 0 {
            writeln!(out)?;
        }
        writeln!(out, "# {}", t.name)?;
        let cells: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| r.iter().map(Value::plain).collect())
            .collect();
        let widths: Vec<usize> = (0..t.columns.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .fold(t.columns[c].len(), usize::max)
            })
            .collect();
        let line = |row: Vec<&str>| {
            let mut s = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{cell:<w$}", w = widths[c]);
            }
            s.trim_end().to_string()
        };
        writeln!(out, "{}", line(t.columns.clone()))?;
        for row in &cells {
            writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
        }
    }
    out.flush()
}

fn render_json_lines<W: Write>(tables: &[Table], mut out: W) -> io::Result<()> {
    for t in tables {
        for row in &t.rows {
            let mut line = format!("{{\"table\":{}", serde_json::Value::from(t.name));
            for (col, v) in t.columns.iter().zip(row) {
                let _ = write!(line, ",{}:{}", serde_json::Value::from(*col), v.json());
            }
            line.push('}');
            writeln!(out, "{line}")?;
        }
    }
    out.flush()
}

fn render_csv<W: Write>(tables: &[Table], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for t in tables {
        w.write_record(std::iter::once("table").chain(t.columns.iter().copied()))?;
        for row in &t.rows {
            w.write_record(
                std::iter::once(t.name.to_string()).chain(row.iter().map(Value::plain)),
            )?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(5.0 / 9.0), "0.555555555556");
        assert_eq!(fmt_num(20.0 / 81.0), "0.246913580247");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1e-10), "1e-10");
        assert_eq!(fmt_num(1.234e-5), "1.234e-05");
        assert_eq!(fmt_num(0.0001234), "0.0001234");
        assert_eq!(fmt_num(123456789012.0), "123456789012");
        assert_eq!(fmt_num(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_num(99999999999.99999), "100000000000");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn formats_agree() {
        let mut t = Table::new("t", &["name", "x", "ok", "gap"]);
        t.push(vec![
            "a,b".into(),
            (1.0 / 3.0).into(),
            true.into(),
            Value::Missing,
        ]);
        let mut csv_out = Vec::new();
        render(&[t.clone()], Format::Csv, &mut csv_out).unwrap();
        assert_eq!(
            String::from_utf8(csv_out).unwrap(),
            "table,name,x,ok,gap\nt,\"a,b\",0.333333333333,true,\n"
        );
        let mut json = Vec::new();
        render(&[t], Format::JsonLines, &mut json).unwrap();
        assert_eq!(
            String::from_utf8(json).unwrap(),
            "{\"table\":\"t\",\"name\":\"a,b\",\"x\":0.333333333333,\"ok\":true,\"gap\":null}\n"
        );
    }
}
