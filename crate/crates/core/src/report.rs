//! Machine-readable verification reports.

use serde::Serialize;

/// One named comparison of a computed value against its expectation.
///
/// `anchor` is the identity being verified, written as a formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `|value - expected| <= tolerance`.
    pub fn absolute(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let pass = (value - expected).abs() <= tolerance;
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            expected,
            tolerance,
            pass,
        }
    }

    /// Passes when `|value - expected| <= tolerance * |expected|`.
    pub fn relative(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let pass = (value - expected).abs() <= tolerance * expected.abs();
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            expected,
            tolerance,
            pass,
        }
    }

    /// A non-negative residual that must stay at or below `tolerance`.
    pub fn residual(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            expected: 0.0,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// A lower bound: passes when `value >= expected`.
    pub fn at_least(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        expected: f64,
    ) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            expected,
            tolerance: 0.0,
            pass: value >= expected,
        }
    }

    /// A boolean property recorded as 1/0.
    pub fn holds(name: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value: if ok { 1.0 } else { 0.0 },
            expected: 1.0,
            tolerance: 0.0,
            pass: ok,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: serde_json::Value) -> Self {
        Self {
            suite: suite.into(),
            params,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,expected,tolerance,pass,anchor\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                c.name,
                c.value,
                c.expected,
                c.tolerance,
                c.pass,
                c.anchor.replace('"', "'")
            ));
        }
        out
    }
}
