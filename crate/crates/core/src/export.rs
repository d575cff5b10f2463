//! Plain-text output helpers shared by every writer.

use std::fmt::Write as _;

use crate::error::{AmaError, Result};

/// Floating-point rendering used in every CSV/JSON-adjacent text output:
/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV builder with a frozen header.
#[derive(Clone, Debug)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    meta: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), meta: Vec::new() }
    }

    /// Metadata rendered as leading `# key=value` comment lines.
    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: &[Field]) {
        assert_eq!(fields.len(), self.header.len(), "row width must match header");
        self.rows.push(fields.iter().map(Field::render).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory write")).expect("utf-8 cells"));
        out
    }
}

#[derive(Clone, Debug)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Int(i) => i.to_string(),
            Field::Float(x) => fmt_f64(*x),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Int(v as i64)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Empty, Into::into)
    }
}

/// A parsed table: leading `# key=value` lines, a header and the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCsv {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Parse tables written by [`CsvTable`]. `#` lines are metadata before the
/// header and comments elsewhere.
pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let meta = text
        .lines()
        .map(str::trim)
        .take_while(|l| l.is_empty() || l.starts_with('#'))
        .filter_map(|l| l.strip_prefix('#'))
        .map(|m| {
            let (k, v) = m.trim().split_once('=').unwrap_or((m.trim(), ""));
            (k.to_string(), v.to_string())
        })
        .collect();
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let err = |e: csv::Error| AmaError::Parse(e.to_string());
    let header: Vec<String> = rd.headers().map_err(err)?.iter().map(String::from).collect();
    if header.iter().all(String::is_empty) {
        return Err(AmaError::Parse("table has no header".into()));
    }
    let rows = rd
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(err))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(ParsedCsv { meta, header, rows })
}
