//! Pass/fail bookkeeping shared by the verification suites.

use serde::Serialize;

use crate::allocation::extended_real;

/// Outcome of one named check over many trials.
///
/// `max_error` is the worst normalized violation (or residual) seen, so a
/// passing check still reports how much room it had.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub skipped: bool,
    pub trials: usize,
    pub failures: usize,
    #[serde(serialize_with = "extended_real::serialize")]
    pub max_error: f64,
}

impl Check {
    pub fn new(name: &'static str) -> Self {
        Check {
            name,
            passed: true,
            skipped: false,
            trials: 0,
            failures: 0,
            max_error: 0.0,
        }
    }

    pub fn skipped(name: &'static str) -> Self {
        Check {
            skipped: true,
            ..Check::new(name)
        }
    }

    pub fn record(&mut self, error: f64, ok: bool) {
        self.trials += 1;
        if error > self.max_error || error.is_nan() {
            self.max_error = error;
        }
        if !ok {
            self.failures += 1;
            self.passed = false;
        }
    }

    /// Folds another partial result for the same check into this one.
    pub fn merge(mut self, other: Check) -> Check {
        self.trials += other.trials;
        self.failures += other.failures;
        self.passed &= other.passed;
        self.skipped &= other.skipped;
        if other.max_error > self.max_error || other.max_error.is_nan() {
            self.max_error = other.max_error;
        }
        self
    }
}
