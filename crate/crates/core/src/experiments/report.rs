//! Machine-readable experiment reports: JSON plus CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One checked relation `value ≤ bound` (or `≥`, as the label says).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub label: String,
    /// The inequality or identity being checked, in words or symbols.
    pub relation: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Criterion {
    /// Passes when `value ≤ bound`.
    pub fn at_most(label: &str, relation: &str, value: f64, bound: f64) -> Self {
        Criterion { label: label.into(), relation: relation.into(), value, bound, pass: value <= bound, note: None }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(label: &str, relation: &str, value: f64, bound: f64) -> Self {
        Criterion { label: label.into(), relation: relation.into(), value, bound, pass: value >= bound, note: None }
    }

    pub fn flag(label: &str, relation: &str, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Criterion { label: label.into(), relation: relation.into(), value: v, bound: 1.0, pass: ok, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub config: serde_json::Value,
    pub criteria: Vec<Criterion>,
    /// Informational measurements that are not checked.
    pub metrics: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub runtime_s: f64,
}

impl Report {
    pub fn new(name: &str, config: serde_json::Value) -> Self {
        Report {
            name: name.into(),
            config,
            criteria: Vec::new(),
            metrics: BTreeMap::new(),
            tables: Vec::new(),
            runtime_s: 0.0,
        }
    }

    pub fn check(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn criterion(&self, label: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<name>.json` and one `<name>_<table>.csv` per table; returns
    /// the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let json = dir.join(format!("{}.json", self.name));
        std::fs::write(&json, self.to_json()?)?;
        out.push(json);
        for t in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.name, t.name));
            std::fs::write(&path, t.to_csv())?;
            out.push(path);
        }
        Ok(out)
    }

    /// One line per criterion, `PASS` or `FAIL` first.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "{} {}/{}: {} (value {:.6e}, bound {:.6e})",
                if c.pass { "PASS" } else { "FAIL" },
                self.name,
                c.label,
                c.relation,
                c.value,
                c.bound
            );
        }
        s
    }
}
