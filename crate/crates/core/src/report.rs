use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of an inequality check: `pass` iff `lhs <= rhs * (1 + tol) + abs_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub detail: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(lhs: f64, rhs: f64, tol: f64, abs_tol: f64) -> Self {
        let mut detail = BTreeMap::new();
        detail.insert("tol".to_string(), tol);
        detail.insert("abs_tol".to_string(), abs_tol);
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs * (1.0 + tol) + abs_tol;
        Report { lhs, rhs, slack: rhs - lhs, pass, detail }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.detail.insert(key.to_string(), value);
    }

    /// Force failure while keeping the recorded numbers (a precondition did not hold).
    pub fn fail_with(mut self, key: &str) -> Self {
        self.pass = false;
        self.detail.insert(key.to_string(), 1.0);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.detail.get(key).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule_uses_relative_and_absolute_tolerance() {
        assert!(Report::new(1.04, 1.0, 0.05, 0.0).pass);
        assert!(!Report::new(1.06, 1.0, 0.05, 0.0).pass);
        assert!(Report::new(1e-11, 0.0, 0.05, 1e-10).pass);
        let r = Report::new(2.0, 3.0, 0.1, 0.0);
        assert_eq!(r.slack, 1.0);
        assert_eq!(r.get("tol"), Some(0.1));
        assert!(!Report::new(f64::NAN, 1.0, 0.0, 0.0).pass);
    }
}
