use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::error::Result;
use crate::profile::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Untested,
}

/// A named one-sided check. `margin` is `rhs − lhs` for `lhs ≤ rhs` checks,
/// so a negative margin is a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub margin: f64,
    pub detail: String,
    /// The statement being checked, in words.
    pub claim: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
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

/// Tabular result of one experiment plus its checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Map<String, Json>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            parameters: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Json::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width for report {}", self.name);
        self.rows.push(cells);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].clone()).collect())
    }

    pub fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    /// Records `lhs ≤ rhs + tol`.
    pub fn check_le(&mut self, name: &str, claim: &str, lhs: f64, rhs: f64, tol: f64) -> Status {
        let margin = rhs - lhs;
        let status = if !(lhs.is_finite() && rhs.is_finite()) {
            Status::Fail
        } else if margin >= -tol {
            Status::Pass
        } else {
            Status::Fail
        };
        self.push(Verdict {
            name: name.to_string(),
            status,
            margin,
            detail: format!("lhs = {lhs:.6e}, rhs = {rhs:.6e}, tol = {tol:.1e}"),
            claim: claim.to_string(),
        });
        status
    }

    pub fn check_flag(&mut self, name: &str, claim: &str, ok: bool, margin: f64, detail: String) -> Status {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(Verdict {
            name: name.to_string(),
            status,
            margin,
            detail,
            claim: claim.to_string(),
        });
        status
    }

    pub fn untested(&mut self, name: &str, claim: &str, reason: String) {
        self.push(Verdict {
            name: name.to_string(),
            status: Status::Untested,
            margin: f64::NAN,
            detail: reason,
            claim: claim.to_string(),
        });
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn any_failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }

    /// Writes `<name>.csv` and `<name>.verdicts.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&csv_path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;

        let json_path = dir.join(format!("{}.verdicts.json", self.name));
        let doc = serde_json::json!({
            "name": self.name,
            "parameters": self.parameters,
            "verdicts": self.verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
            "notes": self.notes,
            "tolerances": super::tolerances::manifest(),
        });
        fs::write(&json_path, serde_json::to_string_pretty(&doc)?)?;
        Ok((csv_path, json_path))
    }
}

// NaN margins (untested checks) serialise as null.
fn verdict_json(v: &Verdict) -> Json {
    serde_json::json!({
        "name": v.name,
        "status": v.status,
        "margin": if v.margin.is_finite() { Json::from(v.margin) } else { Json::Null },
        "detail": v.detail,
        "claim": v.claim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_both_files() {
        let mut r = ExperimentReport::new("demo", &["a", "b"]);
        r.param("h", 0.9);
        r.row(vec![1.0.into(), true.into()]);
        r.check_le("ok", "1 <= 2", 1.0, 2.0, 0.0);
        r.untested("later", "needs data", "no converged cell".into());
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = r.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(c).unwrap();
        assert!(text.starts_with("a,b\n"));
        let doc: Json = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(doc["verdicts"][0]["status"], "pass");
        assert_eq!(doc["verdicts"][1]["status"], "untested");
        assert!(doc["verdicts"][1]["margin"].is_null());
        assert!(!r.any_failed());
    }

    #[test]
    fn failing_check() {
        let mut r = ExperimentReport::new("x", &[]);
        assert_eq!(r.check_le("bad", "3 <= 2", 3.0, 2.0, 0.5), Status::Fail);
        assert!(r.any_failed());
        assert_eq!(r.check_le("nan", "nan", f64::NAN, 2.0, 0.5), Status::Fail);
    }
}
