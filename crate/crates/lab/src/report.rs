use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sgkink_core::io::{write_binary, Snapshot};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Below,
    /// `|value - target| <= limit`.
    Within,
}

/// One tolerance comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, limit, Relation::AtMost, value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, limit, Relation::AtLeast, value >= limit)
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, limit, Relation::Below, value < limit)
    }

    pub fn within(name: &str, value: f64, target: f64, band: f64) -> Self {
        let mut c = Self::make(name, value, band, Relation::Within, (value - target).abs() <= band);
        c.target = Some(target);
        c
    }

    fn make(name: &str, value: f64, limit: f64, relation: Relation, passed: bool) -> Self {
        Check {
            name: name.to_string(),
            value,
            limit,
            target: None,
            relation,
            // NaN never passes
            passed: passed && !value.is_nan(),
        }
    }

    pub fn describe(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => format!("<= {:e}", self.limit),
            Relation::AtLeast => format!(">= {:e}", self.limit),
            Relation::Below => format!("< {:e}", self.limit),
            Relation::Within => format!("within {:e} of {}", self.limit, self.target.unwrap_or(f64::NAN)),
        };
        format!(
            "{} {}: {:e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            rel
        )
    }
}

/// Named columns of equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: ExperimentConfig,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
    pub snapshots: Vec<(String, Snapshot)>,
    /// Why a summary value is missing.
    pub notes: BTreeMap<String, String>,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Report {
            config,
            summary: BTreeMap::new(),
            checks: Vec::new(),
            tables: BTreeMap::new(),
            snapshots: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: f64) {
        self.summary.insert(key.to_string(), v);
    }

    pub fn set_note(&mut self, key: &str, note: &str) {
        self.notes.insert(key.to_string(), note.to_string());
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The `report.json` document.
    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = json!({ "config": self.config });
        let obj = doc.as_object_mut().expect("object");
        if !self.summary.is_empty() {
            obj.insert("summary".into(), json!(self.summary));
        }
        if !self.notes.is_empty() {
            obj.insert("notes".into(), json!(self.notes));
        }
        if !self.checks.is_empty() {
            obj.insert("checks".into(), json!(self.checks));
            obj.insert("passed".into(), json!(self.passed()));
        }
        if !self.tables.is_empty() {
            let files: Vec<String> = self.tables.keys().map(|k| format!("{k}.csv")).collect();
            obj.insert("tables".into(), json!(files));
        }
        if !self.snapshots.is_empty() {
            let files: Vec<String> = self.snapshots.iter().map(|(k, _)| format!("{k}.sgf")).collect();
            obj.insert("snapshots".into(), json!(files));
        }
        doc
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `report.json`, one CSV per table and `SGF1` snapshots into `dir`.
pub fn write_report(r: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&r.to_json())?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    for (name, table) in &r.tables {
        let path = dir.join(format!("{name}.csv"));
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        table.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    }
    for (name, snap) in &r.snapshots {
        let path = dir.join(format!("{name}.sgf"));
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        write_binary(&mut w, snap).map_err(|e| LabError::Core {
            context: format!("writing {}", path.display()),
            source: e,
        })?;
        w.flush().map_err(io_err(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn empty_report_echoes_config_only() {
        let r = Report::new(ExperimentConfig::new(ExperimentKind::Wobbler));
        let v = r.to_json();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["config"]);
        assert_eq!(v["config"]["name"], "wobbler");
        assert!(r.passed());
    }

    #[test]
    fn checks_and_nan() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::below("a", 1.0, 1.0).passed);
        assert!(Check::within("a", -0.45, -0.5, 0.1).passed);
        assert!(!Check::at_least("a", f64::NAN, 0.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 0.0).passed);
        assert!(Check::at_most("x", 0.5, 1.0).describe().starts_with("PASS x"));
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["t", "E0"]);
        t.push(vec![0.0, 8.0]);
        t.push(vec![0.5, 8.000000001]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,E0\n0,8\n0.5,8.000000001\n");
        assert_eq!(t.column("E0").unwrap(), vec![8.0, 8.000000001]);
    }
}
