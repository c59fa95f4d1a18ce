//! Structured outcomes of verification suites.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{format_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Combination used when several outcomes are merged: any failure wins,
    /// then any inconclusive result.
    pub fn merge(self, other: Status) -> Status {
        self.max(other)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckKind {
    /// Rational arithmetic, tolerance zero.
    Exact,
    /// Deterministic floating point against a tolerance.
    Float,
    /// Monte Carlo estimate judged by its standard error.
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckOutcome {
    pub name: String,
    pub kind: CheckKind,
    pub status: Status,
    /// Number of identities, grid points or samples examined.
    pub count: u64,
    pub failures: u64,
    /// Largest residual seen, as `p/q` for exact checks.
    pub residual: String,
    pub residual_f64: f64,
    pub tolerance: Option<f64>,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    pub fn exact(name: impl Into<String>, tally: &ExactTally, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            kind: CheckKind::Exact,
            status: if tally.failures == 0 && tally.count > 0 {
                Status::Pass
            } else {
                Status::Fail
            },
            count: tally.count,
            failures: tally.failures,
            residual: format_q(&tally.max_residual),
            residual_f64: crate::rational::to_f64(&tally.max_residual),
            tolerance: Some(0.0),
            value: None,
            stderr: None,
            detail: detail.into(),
        }
    }

    pub fn float(
        name: impl Into<String>,
        count: u64,
        failures: u64,
        residual: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        let status = if failures == 0 && residual.is_finite() && residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        CheckOutcome {
            name: name.into(),
            kind: CheckKind::Float,
            status,
            count,
            failures,
            residual: alloc::format!("{residual:e}"),
            residual_f64: residual,
            tolerance: Some(tolerance),
            value: None,
            stderr: None,
            detail: detail.into(),
        }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Running count of exact identity checks.
#[derive(Clone, Debug, Default)]
pub struct ExactTally {
    pub count: u64,
    pub failures: u64,
    pub max_residual: Q,
}

impl ExactTally {
    pub fn new() -> Self {
        ExactTally {
            count: 0,
            failures: 0,
            max_residual: Q::zero(),
        }
    }

    /// Records the residual of one scalar identity.
    pub fn record(&mut self, residual: &Q) {
        self.count += 1;
        if !residual.is_zero() {
            self.failures += 1;
            let a = residual.abs();
            if a > self.max_residual {
                self.max_residual = a;
            }
        }
    }

    /// Records a vector identity through the largest coordinate residual.
    pub fn record_vec(&mut self, residual: &[Q]) {
        let worst = residual
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Q::zero);
        self.record(&worst);
    }

    pub fn record_bool(&mut self, ok: bool) {
        self.record(&if ok { Q::zero() } else { crate::rational::one() });
    }

    pub fn ok(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub suite: String,
    pub model: String,
    pub checks: Vec<CheckOutcome>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, model: impl Into<String>) -> Self {
        VerificationReport {
            suite: suite.into(),
            model: model.into(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, c: CheckOutcome) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn status(&self) -> Status {
        if self.checks.is_empty() {
            return Status::Inconclusive;
        }
        self.checks
            .iter()
            .fold(Status::Pass, |acc, c| acc.merge(c.status))
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| c.status != Status::Pass)
    }
}
