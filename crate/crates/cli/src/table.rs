//! Flat tables written as CSV or JSON, and read back.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &Path) -> Result<Format> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            _ => bail!("cannot infer format of {}", path.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            // bitwise, so NaN round-trips compare equal
            (Cell::Num(a), Cell::Num(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            (Cell::Int(a), Cell::Int(b)) => a == b,
            (Cell::Text(a), Cell::Text(b)) => a == b,
            (Cell::Empty, Cell::Empty) => true,
            _ => false,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u8> for Cell {
    fn from(n: u8) -> Self {
        Cell::Int(n.into())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{}", format_num(*x)),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn parse_cell(s: &str) -> Cell {
    if s.is_empty() {
        Cell::Empty
    } else if let Ok(n) = s.parse::<i64>() {
        Cell::Int(n)
    } else if let Ok(x) = s.parse::<f64>() {
        Cell::Num(x)
    } else {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// A single-row table from `(name, value)` pairs.
    pub fn record(fields: Vec<(&str, Cell)>) -> Self {
        let (cols, row): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
        let mut t = Table::new(&cols);
        t.rows.push(row);
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).and_then(|j| self.rows.get(row).map(|r| &r[j]))
    }

    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.get(row, name) {
            Some(Cell::Num(x)) => Some(*x),
            Some(Cell::Int(n)) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn from_csv(text: &str) -> Result<Table> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(parse_cell).collect());
        }
        Ok(Table { columns, rows })
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Num(x) if x.is_finite() => json!(x),
                        Cell::Num(x) => json!(format!("{x}")),
                        Cell::Int(n) => json!(n),
                        Cell::Text(s) => json!(s),
                        Cell::Empty => Value::Null,
                    })
                    .collect()
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "columns": self.columns, "rows": rows }))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Table> {
        let v: Value = serde_json::from_str(text)?;
        let columns = v["columns"]
            .as_array()
            .context("missing \"columns\"")?
            .iter()
            .map(|c| c.as_str().map(str::to_string).context("column names must be strings"))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for row in v["rows"].as_array().context("missing \"rows\"")? {
            let row = row.as_array().context("rows must be arrays")?;
            if row.len() != columns.len() {
                bail!("row has {} cells, expected {}", row.len(), columns.len());
            }
            rows.push(
                row.iter()
                    .map(|c| match c {
                        Value::Null => Ok(Cell::Empty),
                        Value::Number(n) => Ok(match n.as_i64() {
                            Some(i) if !n.is_f64() => Cell::Int(i),
                            _ => Cell::Num(n.as_f64().context("bad number")?),
                        }),
                        Value::String(s) => Ok(parse_cell(s)),
                        other => bail!("unsupported cell {other}"),
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Table { columns, rows })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.render(Format::from_path(path)?)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match Format::from_path(path)? {
            Format::Csv => Table::from_csv(&text),
            Format::Json => Table::from_json(&text),
        }
        .with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(0.1), "x".into(), Cell::Empty]);
        t.push(vec![Cell::Num(2.0), 7usize.into(), Cell::Int(-3)]);
        t.push(vec![Cell::Num(-1.0 / 3.0), "y,z".into(), Cell::Num(f64::NAN)]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        assert_eq!(Table::from_csv(&t.to_csv().unwrap()).unwrap(), t);
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        assert_eq!(Table::from_json(&t.to_json().unwrap()).unwrap(), t);
    }

    #[test]
    fn numbers_keep_all_bits() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(format_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
