//! Pass/fail records of a verification run.

use std::fmt;

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `observed < bound`.
    Below(f64),
    /// `lo ≤ observed ≤ hi`.
    Within(f64, f64),
    /// `observed ≥ bound`.
    AtLeast(f64),
}

impl Threshold {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Threshold::Below(b) => x < b,
            Threshold::Within(lo, hi) => (lo..=hi).contains(&x),
            Threshold::AtLeast(b) => x >= b,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Threshold::Below(b) => write!(f, "< {b:e}"),
            Threshold::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Threshold::AtLeast(b) => write!(f, ">= {b:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub observed: f64,
    pub threshold: Threshold,
    /// `threshold.admits(observed)`; NaN never passes.
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, observed: f64, threshold: Threshold) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold,
            pass: threshold.admits(observed),
        }
    }

    pub fn to_json(&self) -> Value {
        let threshold = match self.threshold {
            Threshold::Below(b) => json!({ "below": b }),
            Threshold::Within(lo, hi) => json!({ "within": [lo, hi] }),
            Threshold::AtLeast(b) => json!({ "at_least": b }),
        };
        json!({
            "name": self.name,
            "observed": self.observed,
            "threshold": threshold,
            "pass": self.pass,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub experiment: String,
    records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn check(&mut self, name: impl Into<String>, observed: f64, threshold: Threshold) {
        self.push(CheckRecord::new(name, observed, threshold));
    }

    pub fn records(&self) -> &[CheckRecord] {
        &self.records
    }

    /// True iff there is at least one record and every record passes.
    pub fn overall_pass(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "records": self.records.iter().map(CheckRecord::to_json).collect::<Vec<_>>(),
            "overall_pass": self.overall_pass(),
        })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(
                f,
                "{} {}: {:.6e} ({})",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.observed,
                r.threshold
            )?;
        }
        write!(
            f,
            "{} {}",
            if self.overall_pass() { "PASS" } else { "FAIL" },
            self.experiment
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_conjunction() {
        let mut r = VerificationReport::new("x");
        assert!(!r.overall_pass());
        r.check("a", 1e-9, Threshold::Below(1e-8));
        r.check("b", 2.0, Threshold::Within(1.5, 3.0));
        assert!(r.overall_pass());
        r.check("c", f64::NAN, Threshold::Below(1.0));
        assert!(!r.overall_pass());
        assert_eq!(r.to_json()["overall_pass"], false);
    }

    #[test]
    fn threshold_edges() {
        assert!(!Threshold::Below(1.0).admits(1.0));
        assert!(Threshold::Within(1.5, 3.0).admits(3.0));
        assert!(Threshold::AtLeast(0.3).admits(0.3));
        assert!(!Threshold::AtLeast(0.3).admits(f64::NAN));
    }
}
