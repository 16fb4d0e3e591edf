use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::Format;
use crate::error::{Error, Result};

/// Outcome label attached to every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    Unstable,
    DecoupledModesExcluded,
    BranchJumpFlagged,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Unstable => "unstable",
            PointStatus::DecoupledModesExcluded => "decoupled-modes-excluded",
            PointStatus::BranchJumpFlagged => "branch-jump-flagged",
        }
    }
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One table entry. Floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Missing => serde_json::Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

/// A figure-ready table with a documented column schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    /// The figure panel this table feeds.
    pub figure: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, figure: &str, columns: &[(&str, &str)]) -> Self {
        Table {
            name: name.into(),
            figure: figure.into(),
            columns: columns.iter().map(|(n, d)| Column { name: (*n).into(), description: (*d).into() }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of a numeric column, `None` where missing.
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> =
                    self.columns.iter().zip(r).map(|(c, v)| (c.name.clone(), v.json())).collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Result of a scenario: tables, one status per grid point and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    pub scenario: String,
    pub config_hash: String,
    pub tables: Vec<Table>,
    pub statuses: Vec<PointStatus>,
    pub metadata: serde_json::Value,
}

impl SweepDataset {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn status_counts(&self) -> BTreeMap<PointStatus, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.statuses {
            *counts.entry(*s).or_insert(0) += 1;
        }
        counts
    }

    pub fn all_ok(&self) -> bool {
        self.statuses.iter().all(|s| *s == PointStatus::Ok)
    }

    fn sidecar(&self) -> serde_json::Value {
        let counts: BTreeMap<&str, usize> = self.status_counts().into_iter().map(|(k, v)| (k.as_str(), v)).collect();
        let tables: Vec<serde_json::Value> = self
            .tables
            .iter()
            .map(|t| serde_json::json!({ "name": t.name, "figure": t.figure, "rows": t.rows.len(), "columns": t.columns }))
            .collect();
        serde_json::json!({
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "code_version": env!("CARGO_PKG_VERSION"),
            "status_counts": counts,
            "tables": tables,
            "details": self.metadata,
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes one file per table plus a JSON metadata sidecar; returns the paths.
pub fn export_dataset(ds: &SweepDataset, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for t in &ds.tables {
        let (path, bytes) = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                t.write_csv(&mut buf).map_err(|e| Error::io(dir, e))?;
                (dir.join(format!("{}.csv", t.name)), buf)
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(&t.to_json()).map_err(|e| Error::Config(e.to_string()))?;
                (dir.join(format!("{}.json", t.name)), text.into_bytes())
            }
        };
        write_file(&path, &bytes)?;
        written.push(path);
    }
    let meta = dir.join(format!("{}.meta.json", ds.scenario));
    let text = serde_json::to_string_pretty(&ds.sidecar()).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&meta, text.as_bytes())?;
    written.push(meta);
    Ok(written)
}

/// Output of one sequential row-task, the unit of caching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowOutput {
    pub tables: BTreeMap<String, Vec<Vec<Cell>>>,
    pub statuses: Vec<PointStatus>,
    pub metadata: serde_json::Value,
}

impl RowOutput {
    pub fn new() -> Self {
        RowOutput { tables: BTreeMap::new(), statuses: Vec::new(), metadata: serde_json::Value::Null }
    }

    pub fn push(&mut self, table: &str, row: Vec<Cell>) {
        self.tables.entry(table.to_string()).or_default().push(row);
    }
}

impl Default for RowOutput {
    fn default() -> Self {
        Self::new()
    }
}

/// Completed row-tasks stored under `<root>/<config hash>/row-<index>.json`.
#[derive(Debug, Clone)]
pub struct RowCache {
    dir: PathBuf,
}

impl RowCache {
    pub fn new(root: &Path, config_hash: &str) -> Result<Self> {
        let dir = root.join(config_hash);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(RowCache { dir })
    }

    fn path(&self, index: usize) -> PathBuf {
        self.dir.join(format!("row-{index}.json"))
    }

    pub fn load(&self, index: usize) -> Option<RowOutput> {
        let text = std::fs::read_to_string(self.path(index)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, index: usize, row: &RowOutput) -> Result<()> {
        let path = self.path(index);
        let tmp = self.dir.join(format!(".row-{index}.tmp"));
        let text = serde_json::to_string(row).map_err(|e| Error::Config(e.to_string()))?;
        write_file(&tmp, text.as_bytes())?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    pub fn contains(&self, index: usize) -> bool {
        self.path(index).exists()
    }
}
