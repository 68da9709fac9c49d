//! Majorization order, Robin Hood transfers and Schur-concavity checks.
//!
//! `x ⪯ y` (y majorizes x, y is the more even vector) when both have the
//! same total and every ascending prefix sum of `x` is at most that of `y`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::Allocation;
use crate::error::{domain, Error, Result};
use crate::measures::{fairness_entropy_limit, fairness_unified};
use crate::report::Check;
use crate::sampling::{positive_allocation, trial_rng};

/// Ascending entries and their running sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedAllocation {
    ascending: Vec<f64>,
    prefix_sums: Vec<f64>,
}

impl SortedAllocation {
    pub fn new(x: &Allocation) -> Self {
        let ascending = x.ascending();
        let prefix_sums = ascending
            .iter()
            .scan(0.0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        SortedAllocation {
            ascending,
            prefix_sums,
        }
    }

    pub fn ascending(&self) -> &[f64] {
        &self.ascending
    }

    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix_sums
    }

    pub fn total(&self) -> f64 {
        *self.prefix_sums.last().expect("allocations are non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Majorization {
    Majorizes,
    DoesNotMajorize,
    IncomparableSums,
}

impl Majorization {
    pub fn holds(self) -> bool {
        self == Majorization::Majorizes
    }
}

/// Absolute tolerance `1e-9 · w(x)` used when callers have no better one.
pub fn default_tolerance(x: &Allocation) -> f64 {
    1e-9 * x.total()
}

/// Whether `y` majorizes `x` (`x ⪯ y`).
pub fn majorizes(y: &Allocation, x: &Allocation, tol: f64) -> Result<Majorization> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    if !(tol >= 0.0) {
        return Err(domain("tol", tol, "must be non-negative"));
    }
    let (sy, sx) = (SortedAllocation::new(y), SortedAllocation::new(x));
    if (sy.total() - sx.total()).abs() > tol {
        return Ok(Majorization::IncomparableSums);
    }
    let dominated = sx
        .prefix_sums()
        .iter()
        .zip(sy.prefix_sums())
        .all(|(px, py)| *px <= py + tol);
    Ok(if dominated {
        Majorization::Majorizes
    } else {
        Majorization::DoesNotMajorize
    })
}

/// Moves `eps` from the richer user `i` to the poorer user `j`.
///
/// The result `R` is at least as even as `x`, so `majorizes(R, x)` holds.
pub fn robin_hood(x: &Allocation, i: usize, j: usize, eps: f64) -> Result<Allocation> {
    let n = x.len();
    if i >= n {
        return Err(domain("i", i as f64, "index out of range"));
    }
    if j >= n {
        return Err(domain("j", j as f64, "index out of range"));
    }
    if i == j {
        return Err(domain("j", j as f64, "must differ from i"));
    }
    let v = x.values();
    if !(v[i] > v[j]) {
        return Err(domain(
            "i",
            i as f64,
            "donor must be strictly richer than the recipient",
        ));
    }
    if !(eps > 0.0 && eps < v[i] - v[j]) {
        return Err(domain("eps", eps, "must lie in (0, x_i - x_j)"));
    }
    let mut out = v.to_vec();
    out[i] -= eps;
    out[j] += eps;
    Allocation::new(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurBeta {
    pub beta: f64,
    pub note: Option<&'static str>,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub betas: Vec<SchurBeta>,
}

/// Relative slack allowed before a fairness decrease counts as a violation.
pub const SCHUR_SLACK: f64 = 1e-12;

fn f_of(x: &Allocation, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        Ok(fairness_entropy_limit(x)?.value)
    } else {
        Ok(fairness_unified(x, beta)?.value)
    }
}

/// Normalized amount by which `after` falls below `before`.
fn decrease(before: f64, after: f64) -> f64 {
    if before == after {
        return 0.0;
    }
    (before - after).max(0.0) / before.abs().max(1.0)
}

/// Robin Hood monotonicity, fixed-tax and zero-padding checks per `β`.
///
/// Trial `t` of every `β` draws from the generator seeded with `seed + t`,
/// so the same vectors are reused across the grid.
pub fn schur_concavity_suite(beta_grid: &[f64], trials: usize, seed: u64) -> Result<SchurReport> {
    if trials == 0 {
        return Err(domain("trials", 0.0, "must be positive"));
    }
    if let Some(&b) = beta_grid.iter().find(|b| !b.is_finite()) {
        return Err(domain("beta", b, "must be finite"));
    }
    let betas = beta_grid
        .iter()
        .map(|&beta| schur_one(beta, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SchurReport {
        seed,
        trials,
        passed: betas.iter().all(|b| b.passed),
        betas,
    })
}

fn schur_one(beta: f64, trials: usize, seed: u64) -> Result<SchurBeta> {
    if beta == 1.0 {
        return Ok(SchurBeta {
            beta,
            note: Some("discontinuity at beta = 1; checks skipped"),
            passed: true,
            checks: vec![
                Check::skipped("robin_hood"),
                Check::skipped("fixed_tax"),
                Check::skipped("zero_padding"),
            ],
        });
    }
    let partials = (0..trials)
        .into_par_iter()
        .map(|t| schur_trial(beta, seed, t as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = vec![
        Check::new("robin_hood"),
        Check::new("fixed_tax"),
        if beta < 1.0 {
            Check::new("zero_padding")
        } else {
            Check::skipped("zero_padding")
        },
    ];
    for part in partials {
        for (acc, c) in checks.iter_mut().zip(part) {
            *acc = acc.clone().merge(c);
        }
    }
    Ok(SchurBeta {
        beta,
        note: (beta == 0.0).then_some("entropy limit"),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn schur_trial(beta: f64, seed: u64, trial: u64) -> Result<[Check; 3]> {
    let mut rng = trial_rng(seed, trial);
    let n = rng.gen_range(2..=8);
    let x = loop {
        let x = positive_allocation(&mut rng, n);
        if !x.positive_entries_equal() {
            break x;
        }
    };
    let before = f_of(&x, beta)?;

    let mut rh = Check::new("robin_hood");
    let (i, j) = loop {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let (va, vb) = (x.values()[a], x.values()[b]);
        if va > vb {
            break (a, b);
        }
        if vb > va {
            break (b, a);
        }
    };
    let gap = x.values()[i] - x.values()[j];
    let eps = gap * rng.gen_range(f64::EPSILON..1.0 - f64::EPSILON);
    if eps > 0.0 && eps < gap {
        let after = f_of(&robin_hood(&x, i, j, eps)?, beta)?;
        let d = decrease(before, after);
        rh.record(d, d <= SCHUR_SLACK);
    }

    let mut tax = Check::new("fixed_tax");
    let c = x.min() * rng.gen_range(0.0..1.0);
    let taxed: Vec<f64> = x.values().iter().map(|v| v - c).collect();
    if let Ok(taxed) = Allocation::new(taxed) {
        // Taxing everyone equally must not make the allocation fairer.
        let rise = decrease(f_of(&taxed, beta)?, before);
        tax.record(rise, rise <= SCHUR_SLACK);
    }

    let mut pad = Check::new("zero_padding");
    if beta < 1.0 {
        let k = rng.gen_range(1..=4);
        let padded = f_of(&x.with_zeros(k), beta)?;
        let err = (padded - before).abs() / before.abs();
        pad.record(err, err <= SCHUR_SLACK);
    } else {
        pad = Check::skipped("zero_padding");
    }
    Ok([rh, tax, pad])
}
