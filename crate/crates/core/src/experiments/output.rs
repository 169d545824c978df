//! CSV tables with a sidecar metadata file.

use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A numeric table whose first column is the x-axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InvalidOutput(format!(
                "row {} has {} values for {} columns",
                self.rows.len(),
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Checks the column count of every row, that the x-axis is strictly
    /// increasing, and that every value is finite.
    pub fn validate(&self) -> Result<()> {
        if self.header.is_empty() {
            return Err(Error::InvalidOutput("empty header".into()));
        }
        if self.header.iter().any(|h| h.contains(',') || h.contains('\n')) {
            return Err(Error::InvalidOutput("column names must not contain separators".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(Error::InvalidOutput(format!(
                    "row {i}: expected {} values, got {}",
                    self.header.len(),
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidOutput(format!(
                    "row {i}, column `{}`: non-finite value",
                    self.header[j]
                )));
            }
            if i > 0 && !(row[0] > self.rows[i - 1][0]) {
                return Err(Error::InvalidOutput(format!(
                    "x-axis `{}` not increasing at row {i}",
                    self.header[0]
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn extend(&mut self, other: Metadata) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Validates `table` and writes `<dir>/<stem>.csv` and `<dir>/<stem>.meta`.
pub fn write_outputs(dir: &Path, stem: &str, table: &CsvTable, meta: &Metadata) -> Result<(PathBuf, PathBuf)> {
    table.validate()?;
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta"));
    let mut full = meta.clone();
    full.push("artifact_version", env!("CARGO_PKG_VERSION"));
    full.push("columns", table.header().join(" "));
    full.push("rows", table.rows().len());
    std::fs::write(&csv, table.to_csv())?;
    std::fs::write(&meta_path, full.render())?;
    Ok((csv, meta_path))
}
