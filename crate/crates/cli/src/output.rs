//! Tabular output: '#'-prefixed metadata, one or more comma-separated
//! sections, numbers printed to a fixed count of significant digits.
//!
//! ```text
//! # command: spectrum
//! # n_atoms: 2
//! delta_over_gamma,R
//! -3,0.791474405291
//! ...
//! # section: features
//! kind,delta,value,width
//! dip,0,0.25,0.0990712310278
//! ```

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use thiserror::Error;

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Section {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.into_iter().map(Cell::as_f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub metadata: Vec<(String, String)>,
    /// The first section is the main table and is written without a header
    /// line of its own.
    pub sections: Vec<Section>,
}

impl Document {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// `%g`-style formatting with `digits` significant digits and trailing zeros
/// removed.
pub fn format_number(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn format_cell(cell: &Cell, digits: usize) -> String {
    match cell {
        Cell::Num(x) => format_number(*x, digits),
        Cell::Int(i) => i.to_string(),
        Cell::Text(t) => t.clone(),
    }
}

pub fn to_csv(doc: &Document, digits: usize) -> String {
    let mut out = String::new();
    for (k, v) in &doc.metadata {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    for (i, section) in doc.sections.iter().enumerate() {
        if i > 0 {
            writeln!(out, "# section: {}", section.name).unwrap();
        }
        writeln!(out, "{}", section.columns.join(",")).unwrap();
        for row in &section.rows {
            let cells: Vec<String> = row.iter().map(|c| format_cell(c, digits)).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
    }
    out
}

pub fn to_json(doc: &Document, digits: usize) -> String {
    let mut meta = Map::new();
    for (k, v) in &doc.metadata {
        meta.insert(k.clone(), Value::String(v.clone()));
    }
    let sections: Vec<Value> = doc
        .sections
        .iter()
        .map(|s| {
            let rows: Vec<Value> = s
                .rows
                .iter()
                .map(|row| {
                    Value::Array(
                        row.iter()
                            .map(|c| match c {
                                Cell::Num(x) => format_number(*x, digits)
                                    .parse::<f64>()
                                    .ok()
                                    .and_then(serde_json::Number::from_f64)
                                    .map_or(Value::Null, Value::Number),
                                Cell::Int(i) => json!(i),
                                Cell::Text(t) => json!(t),
                            })
                            .collect(),
                    )
                })
                .collect();
            json!({ "name": s.name, "columns": s.columns, "rows": rows })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({ "metadata": meta, "sections": sections }))
        .expect("serializable document");
    text.push('\n');
    text
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {0}: row has {1} cells, header has {2}")]
    Width(usize, usize, usize),
    #[error("line {0}: data row before a column header")]
    NoHeader(usize),
}

/// Reads back what [`to_csv`] writes. The main section is named `data`.
pub fn parse_csv(text: &str) -> Result<Document, ParseError> {
    let mut doc = Document::default();
    let mut current: Option<Section> = Some(Section {
        name: "data".into(),
        ..Section::default()
    });
    let mut in_header = true;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(name) = comment.strip_prefix("section:") {
                doc.sections.extend(current.take());
                current = Some(Section {
                    name: name.trim().to_string(),
                    ..Section::default()
                });
            } else if in_header {
                if let Some((k, v)) = comment.split_once(':') {
                    doc.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        in_header = false;
        let section = current.as_mut().ok_or(ParseError::NoHeader(lineno))?;
        let cells: Vec<&str> = line.split(',').collect();
        if section.columns.is_empty() {
            section.columns = cells.iter().map(|c| c.to_string()).collect();
            continue;
        }
        if cells.len() != section.columns.len() {
            return Err(ParseError::Width(lineno, cells.len(), section.columns.len()));
        }
        section.rows.push(cells.into_iter().map(parse_cell).collect());
    }
    doc.sections.extend(current);
    Ok(doc)
}

fn parse_cell(s: &str) -> Cell {
    if let Ok(i) = s.parse::<i64>() {
        return Cell::Int(i);
    }
    match s.parse::<f64>() {
        Ok(x) => Cell::Num(x),
        Err(_) => Cell::Text(s.to_string()),
    }
}
