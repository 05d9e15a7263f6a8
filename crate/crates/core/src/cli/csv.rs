//! Numeric CSV tables: `#` metadata lines, one header line, then rows.
//!
//! Key columns (sample sizes, orders, norm indices) are written as integers
//! or `inf`; value columns in scientific notation with 12 significant
//! digits. Values are rounded to that precision when pushed, so a table
//! read back from disk compares equal to the one that was written.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Key,
    Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<(String, ColumnKind)>,
    pub rows: Vec<Vec<f64>>,
}

fn format_cell(v: f64, kind: ColumnKind) -> String {
    match kind {
        _ if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.to_string(),
        ColumnKind::Key if v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        _ => format!("{v:.11e}"),
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

impl Table {
    pub fn new(columns: &[(&str, ColumnKind)]) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.iter().map(|&(n, k)| (n.to_string(), k)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        let row = row
            .iter()
            .zip(&self.columns)
            .map(|(&v, &(_, kind))| {
                parse_cell(&format_cell(v, kind)).expect("formatted cells parse")
            })
            .collect();
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|(n, _)| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        s.push_str(&names.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(&v, &(_, kind))| format_cell(v, kind))
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Inverse of [`Table::render`]. A column is a key column when none of
    /// its cells uses a decimal point or exponent.
    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) if line.starts_with('#') => {
                    let body = line[1..].trim_start();
                    let (k, v) = body.split_once(": ").unwrap_or((body, ""));
                    metadata.push((k.to_string(), v.to_string()));
                }
                Some((_, line)) => break line,
                None => return Err(Error::config("CSV has no header line")),
            }
        };
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        let mut is_key = vec![true; names.len()];
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() {
                return Err(Error::config(format!(
                    "CSV line {}: {} cells, header has {}",
                    i + 1,
                    cells.len(),
                    names.len()
                )));
            }
            let mut row = Vec::with_capacity(cells.len());
            for (j, c) in cells.iter().enumerate() {
                if c.contains(['.', 'e']) && !c.contains("inf") {
                    is_key[j] = false;
                }
                row.push(parse_cell(c).ok_or_else(|| {
                    Error::config(format!("CSV line {}: bad number {c:?}", i + 1))
                })?);
            }
            rows.push(row);
        }
        let columns = names
            .into_iter()
            .zip(is_key)
            .map(|(n, k)| (n, if k { ColumnKind::Key } else { ColumnKind::Value }))
            .collect();
        Ok(Table {
            metadata,
            columns,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Table::parse(&text)
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
