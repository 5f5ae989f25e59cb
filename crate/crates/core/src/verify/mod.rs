//! Numerical checks of the quantitative regularity theorems on computed
//! minimizers and synthetic networks.
//!
//! Every check produces rows asserting `lhs <= rhs` up to a tolerance; the
//! margin is `rhs + tolerance - lhs`, so a row fails exactly when its margin
//! is negative.

mod checks;
mod suite;

use serde::Serialize;

pub use checks::{
    check_almost_minimality, check_c1_modulus, check_density_dichotomy, check_excess_length, check_height_bound,
    check_local_modulus_regularity, check_monotonicity, excess_length_sides, DensityClass, HubStrategy, Window,
};
pub use suite::{
    run_suite, sub_stream, GeodesicInstance, NetworkInstance, QuasihypInstance, Suite, SuiteCheck, SuiteOutcome,
};

/// Header of the per-check CSV files.
pub const CSV_HEADER: &str = "check,instance,r,lhs,rhs,margin,pass";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance: String,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(instance: impl Into<String>, r: f64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs + tolerance - lhs;
        Self {
            instance: instance.into(),
            r,
            lhs,
            rhs,
            margin,
            // NaN compares false and fails the row
            pass: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub instances: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub fitted_constants: Vec<NamedValue>,
    /// CSV file with one line per row, relative to the report directory.
    pub details_path: String,
    /// Planted reports certify that the check can fail: they pass only when
    /// they record violations.
    pub planted: bool,
    #[serde(skip)]
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn new(check_name: impl Into<String>, rows: Vec<ReportRow>, fitted_constants: Vec<(&str, f64)>) -> Self {
        let check_name = check_name.into();
        let worst = rows
            .iter()
            .map(|r| r.margin)
            .filter(|m| m.is_finite())
            .fold(f64::INFINITY, f64::min);
        Self {
            details_path: format!("{check_name}.csv"),
            check_name,
            instances: rows.len(),
            violations: rows.iter().filter(|r| !r.pass).count(),
            worst_margin: if worst.is_finite() { worst } else { 0.0 },
            fitted_constants: fitted_constants
                .into_iter()
                .map(|(name, value)| NamedValue {
                    name: name.to_string(),
                    value,
                })
                .collect(),
            planted: false,
            rows,
        }
    }

    /// Merges per-instance reports under one name. Instance labels get the
    /// part label as prefix; a fitted constant keeps its largest value.
    pub fn combine(check_name: impl Into<String>, parts: Vec<(String, VerificationReport)>) -> Self {
        let mut rows = Vec::new();
        let mut constants: Vec<NamedValue> = Vec::new();
        for (label, part) in parts {
            rows.extend(part.rows.into_iter().map(|mut r| {
                r.instance = format!("{label}/{}", r.instance);
                r
            }));
            for c in part.fitted_constants {
                match constants.iter_mut().find(|k| k.name == c.name) {
                    Some(k) => k.value = k.value.max(c.value),
                    None => constants.push(c),
                }
            }
        }
        let mut out = Self::new(check_name, rows, Vec::new());
        out.fitted_constants = constants;
        out
    }

    pub fn planted(mut self) -> Self {
        self.planted = true;
        self
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.fitted_constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn passed(&self) -> bool {
        if self.planted {
            self.violations > 0
        } else {
            self.violations == 0
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.check_name, r.instance, r.r, r.lhs, r.rhs, r.margin, r.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_and_pass() {
        let ok = ReportRow::new("a", 0.1, 1.0, 1.0, 0.0);
        assert!(ok.pass && ok.margin == 0.0);
        let bad = ReportRow::new("b", 0.1, 2.0, 1.0, 0.5);
        assert!(!bad.pass && bad.margin == -0.5);
        assert!(!ReportRow::new("c", 0.1, f64::NAN, 1.0, 0.0).pass);
    }

    #[test]
    fn combine_prefixes_and_keeps_largest_constant() {
        let a = VerificationReport::new("x", vec![ReportRow::new("r", 1.0, 0.0, 1.0, 0.0)], vec![("C", 2.0)]);
        let b = VerificationReport::new("x", vec![ReportRow::new("r", 1.0, 2.0, 1.0, 0.0)], vec![("C", 5.0)]);
        let c = VerificationReport::combine("all", vec![("g0".into(), a), ("g1".into(), b)]);
        assert_eq!(c.instances, 2);
        assert_eq!(c.violations, 1);
        assert_eq!(c.constant("C"), Some(5.0));
        assert_eq!(c.rows[1].instance, "g1/r");
        assert_eq!(c.worst_margin, -1.0);
        assert!(!c.passed());
        assert!(c.clone().planted().passed());
        assert!(c.to_csv().starts_with(CSV_HEADER));
    }
}
