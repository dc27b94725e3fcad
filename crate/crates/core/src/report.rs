//! Structured pass/fail reports for the verification commands.
//!
//! A `Report` is a named bundle of `Check`s; it passes iff every check
//! passes. Reports serialize to JSON with lower_snake_case fields (the
//! shape is pinned by `schema/report.schema.json`) and render to plain
//! text for terminal use.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest observed deviation, when the check measures one.
    pub max_error: Option<f64>,
    /// Bound `max_error` was held to, when the check measures one.
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub q: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: impl Into<String>, q: u64) -> Self {
        Report {
            name: name.into(),
            q,
            passed: true,
            checks: Vec::new(),
        }
    }

    /// Record a check that measures a numeric deviation against a bound.
    pub fn check_error(
        &mut self,
        name: impl Into<String>,
        max_error: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) {
        // NaN must fail, so compare for acceptance rather than rejection
        let passed = max_error <= tolerance;
        self.push(Check {
            name: name.into(),
            passed,
            max_error: Some(max_error),
            tolerance: Some(tolerance),
            detail: detail.into(),
        });
    }

    /// Record an all-or-nothing check (exact identities, structural facts).
    pub fn check_bool(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.push(Check {
            name: name.into(),
            passed,
            max_error: None,
            tolerance: None,
            detail: detail.into(),
        });
    }

    fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    /// Fold another report's checks into this one, prefixing their names.
    pub fn absorb(&mut self, other: Report) {
        for mut check in other.checks {
            check.name = format!("{}.{}", other.name, check.name);
            self.push(check);
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "report {} (q={}): {}", self.name, self.q, verdict);
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "  [{}] {}", mark, c.name);
            if let (Some(err), Some(tol)) = (c.max_error, c.tolerance) {
                let _ = write!(out, " (max_error {err:.3e}, tolerance {tol:.1e})");
            }
            if c.detail.is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, " -- {}", c.detail);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
