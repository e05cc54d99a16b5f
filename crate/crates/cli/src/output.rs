//! Tables and their CSV / JSON renderings.

use std::io::Write;
use std::path::Path;

use platoon_core::money::{format_exact, format_fixed, to_f64};
use platoon_core::Money;
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone)]
pub enum Cell {
    Int(usize),
    Num(Money),
    Text(String),
    /// Exact payoffs; JSON only.
    Payoffs(Vec<Money>),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}
impl From<Money> for Cell {
    fn from(v: Money) -> Self {
        Cell::Num(v)
    }
}
impl From<&Money> for Cell {
    fn from(v: &Money) -> Self {
        Cell::Num(v.clone())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub precision: usize,
    pub exact: bool,
}

impl From<&RunConfig> for Style {
    fn from(c: &RunConfig) -> Self {
        Style {
            precision: c.precision,
            exact: c.exact,
        }
    }
}

impl Style {
    fn num(&self, m: &Money) -> String {
        if self.exact {
            format_exact(m)
        } else {
            format_fixed(m, self.precision)
        }
    }
}

/// A named table. Columns listed in `json_only` are left out of CSV.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub json_only: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            json_only: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn json_only(mut self, cols: &[&'static str]) -> Self {
        self.json_only = cols.to_vec();
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self, style: Style) -> Result<Vec<u8>, CliError> {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&i| !self.json_only.contains(&self.columns[i]))
            .collect();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(keep.iter().map(|&i| self.columns[i]))
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            let fields: Vec<String> = keep
                .iter()
                .map(|&i| match &row[i] {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(m) => style.num(m),
                    Cell::Text(s) => s.clone(),
                    Cell::Payoffs(v) => v.iter().map(format_exact).collect::<Vec<_>>().join(" "),
                    Cell::Empty => String::new(),
                })
                .collect();
            w.write_record(&fields).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self, style: Style) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), json_cell(cell, style));
                }
                Value::Object(obj)
            })
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&Value::Array(rows)).expect("JSON values serialize");
        bytes.push(b'\n');
        bytes
    }

    pub fn render(&self, format: Format, style: Style) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(style),
            Format::Json => Ok(self.to_json(style)),
        }
    }
}

fn json_cell(cell: &Cell, style: Style) -> Value {
    match cell {
        Cell::Int(v) => Value::from(*v),
        // Exact mode keeps fractions as strings; otherwise the rounded decimal
        // becomes a JSON number.
        Cell::Num(m) if style.exact => Value::String(format_exact(m)),
        Cell::Num(m) => {
            let rounded: f64 = style.num(m).parse().unwrap_or_else(|_| to_f64(m));
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Payoffs(v) => Value::Array(v.iter().map(|m| Value::String(format_exact(m))).collect()),
        Cell::Empty => Value::Null,
    }
}

/// Writes each table to `<dir>/<name>.<ext>` when an output directory is set,
/// otherwise to `out`, separated by blank lines.
pub fn emit(tables: &[Table], cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let style = Style::from(cfg);
    let ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &cfg.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            for t in tables {
                let path = dir.join(format!("{}.{ext}", t.name));
                write_file(&path, &t.render(cfg.format, style)?)?;
            }
        }
        None => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.write_all(b"\n")?;
                }
                out.write_all(&t.render(cfg.format, style)?)?;
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
