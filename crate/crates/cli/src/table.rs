use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::config::Format;

/// Row status codes shared by every sweep.
pub const STATUS_OK: i64 = 0;
pub const STATUS_UNSTABLE: i64 = 1;
pub const STATUS_DEGENERATE: i64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// # Panics
    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Vec<Cell>>) {
        for r in rows {
            self.push(r);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// One object with `meta`, `columns` and `rows`; non-finite numbers become `null`.
    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({ "meta": meta, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Reads back the output of [`SweepTable::to_csv`]. Cells that parse as
    /// integers or floats come back numeric, everything else as text.
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut meta = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines.next().ok_or("missing header")?;
            match line.strip_prefix("# ") {
                Some(m) => {
                    let (k, v) = m
                        .split_once(" = ")
                        .ok_or_else(|| format!("bad metadata line `{line}`"))?;
                    meta.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let mut t = SweepTable {
            meta,
            columns: header.split(',').map(str::to_string).collect(),
            rows: Vec::new(),
        };
        for line in lines {
            let row: Vec<Cell> = line
                .split(',')
                .map(|c| {
                    if let Ok(i) = c.parse::<i64>() {
                        Cell::Int(i)
                    } else if let Ok(x) = c.parse::<f64>() {
                        Cell::Num(x)
                    } else {
                        Cell::Text(c.to_string())
                    }
                })
                .collect();
            if row.len() != t.columns.len() {
                return Err(format!(
                    "row has {} cells, header has {}",
                    row.len(),
                    t.columns.len()
                ));
            }
            t.rows.push(row);
        }
        Ok(t)
    }
}
