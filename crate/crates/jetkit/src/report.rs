//! Structured diagnostic reports: measured quantities against their bound
//! values, serialized deterministically as JSON or CSV.

use crate::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `measured / bound` (infinity when the bound is zero but the
    /// measurement is not).
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub label: String,
    pub mode: String,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
}

impl DiagnosticsReport {
    pub fn new(label: impl Into<String>, mode: impl Into<String>, seed: u64) -> Self {
        DiagnosticsReport {
            label: label.into(),
            mode: mode.into(),
            seed,
            rows: Vec::new(),
        }
    }

    /// Append a measurement checked against an upper bound.
    pub fn push(&mut self, name: impl Into<String>, measured: f64, bound: f64) {
        let ratio = if bound != 0.0 {
            measured / bound
        } else if measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        self.rows.push(CheckRow {
            name: name.into(),
            measured,
            bound,
            ratio,
            pass: measured <= bound,
        });
    }

    /// Append an informational value without a bound (always passes).
    pub fn note(&mut self, name: impl Into<String>, measured: f64) {
        self.rows.push(CheckRow {
            name: name.into(),
            measured,
            bound: f64::INFINITY,
            ratio: 0.0,
            pass: true,
        });
    }

    pub fn breaches(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn write_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "measured", "bound", "ratio", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                &format!("{:.17e}", r.measured),
                &format!("{:.17e}", r.bound),
                &format!("{:.17e}", r.ratio),
                if r.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One-line console rendering per row.
    pub fn render_text(&self) -> String {
        let mut s = format!("# {} (mode={}, seed={})\n", self.label, self.mode, self.seed);
        for r in &self.rows {
            if r.bound.is_infinite() {
                s.push_str(&format!("  {:<44} {:>13.6e}\n", r.name, r.measured));
            } else {
                s.push_str(&format!(
                    "  {:<44} {:>13.6e} ≤ {:>13.6e}  [{}]\n",
                    r.name,
                    r.measured,
                    r.bound,
                    if r.pass { "ok" } else { "BREACH" }
                ));
            }
        }
        s
    }
}
