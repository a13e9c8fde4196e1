//! Common experiment-report schema shared by the library verifiers and
//! the command-line harness: scalar results with their measured error
//! bounds, tabular data for CSV emission, and an echo of the inputs.

use serde::Serialize;
use std::collections::BTreeMap;

/// A structured experiment record. Scalar entries carry their measured
/// error/tail estimates in the `tails` map under the same key, so every
/// numeric claim is paired with its bound.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ExperimentReport {
    pub experiment: String,
    /// echo of the effective inputs, stringified
    pub inputs: BTreeMap<String, String>,
    pub scalars: BTreeMap<String, f64>,
    /// measured error bounds / tail masses keyed like `scalars`
    pub tails: BTreeMap<String, f64>,
    /// overall verdict when the experiment has a pass/fail meaning
    pub passed: Option<bool>,
    pub wall_clock_secs: f64,
    /// hash of the effective configuration (filled by the harness)
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn scalar(&mut self, key: &str, value: f64) -> &mut Self {
        self.scalars.insert(key.to_string(), value);
        self
    }

    pub fn tail(&mut self, key: &str, value: f64) -> &mut Self {
        self.tails.insert(key.to_string(), value);
        self
    }
}

/// A named table destined for one CSV file.
#[derive(Debug, Clone, Serialize)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Render as CSV: header always present, values in full-precision
    /// scientific notation, no locale dependence.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_scientific_cells() {
        let mut t = DataTable::new("demo", &["n", "value"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![2.0, -1.25e-7]);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,value");
        let row = lines.next().unwrap();
        assert!(row.starts_with("1.00000000000000000e0,"));
        assert!(csv.contains("e-7"));
    }

    #[test]
    fn report_serialises_deterministically() {
        let mut r = ExperimentReport::new("demo");
        r.input("b", 2).input("a", 1);
        r.scalar("z", 1.0).scalar("y", 2.0);
        let one = serde_json::to_string(&r).unwrap();
        let two = serde_json::to_string(&r).unwrap();
        assert_eq!(one, two);
        // BTreeMap keys come out sorted
        assert!(one.find("\"a\"").unwrap() < one.find("\"b\"").unwrap());
    }
}
