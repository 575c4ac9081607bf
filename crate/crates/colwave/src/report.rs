//! Report types and writers. Measured numbers and PASS/FAIL verdicts are
//! kept separate so tolerance changes never touch measurement code, and
//! report JSON stays byte-reproducible (timestamps live in a side file).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A full scenario report: one verdict per analysis plus the raw measured
/// structures, keyed deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub scenario: String,
    pub verdicts: BTreeMap<String, bool>,
    pub measurements: BTreeMap<String, serde_json::Value>,
}

impl ReportBundle {
    pub fn new(scenario: &str) -> Self {
        ReportBundle {
            scenario: scenario.to_string(),
            verdicts: BTreeMap::new(),
            measurements: BTreeMap::new(),
        }
    }

    pub fn verdict(&mut self, name: &str, pass: bool) {
        self.verdicts.insert(name.to_string(), pass);
    }

    pub fn measure<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.measurements
            .insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }

    /// Write `report.json` (reproducible) and `metadata.json` (timestamped)
    /// into the output directory.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        let meta = serde_json::json!({
            "written_unix_ms": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            "version": env!("CARGO_PKG_VERSION"),
        });
        fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

/// Write a CSV table with the given header and rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_is_deterministic() {
        let mut r = ReportBundle::new("demo");
        r.verdict("zeta", true);
        r.verdict("alpha", false);
        r.measure("numbers", &vec![1.0, 2.0]).unwrap();
        let a = serde_json::to_string(&r).unwrap();
        let b = serde_json::to_string(&r).unwrap();
        assert_eq!(a, b);
        // BTreeMap keys serialize sorted
        assert!(a.find("alpha").unwrap() < a.find("zeta").unwrap());
        assert!(!r.all_pass());
    }
}
