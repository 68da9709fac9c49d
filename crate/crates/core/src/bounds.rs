//! Diagnostics derived from the fairness value: starvation bounds, the
//! threshold resource level, box-constraint lower bounds and β sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{extended_real, Allocation};
use crate::error::{domain, Error, Result};
use crate::measures::{fairness_entropy_limit, fairness_unified, share_power_sum};

fn f_of(x: &Allocation, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        Ok(fairness_entropy_limit(x)?.value)
    } else {
        Ok(fairness_unified(x, beta)?.value)
    }
}

fn check_regular_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(domain("beta", beta, "must be finite"));
    }
    if beta == 0.0 || beta == 1.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "not defined at beta in {0, 1}",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StarvationBounds {
    /// `β < 1`: at most `n − f` users starve and someone gets at least
    /// `Σx / f`.
    Bounded {
        fairness: f64,
        max_zero_users: f64,
        min_max_resource: f64,
        zero_users: usize,
        max_resource: f64,
    },
    /// `β > 1`: the measure is `−∞` exactly when someone starves.
    NegativeInfinityRule {
        #[serde(serialize_with = "extended_real::serialize")]
        fairness: f64,
        zero_users: usize,
    },
}

pub fn starvation_bounds(x: &Allocation, beta: f64) -> Result<StarvationBounds> {
    if !beta.is_finite() {
        return Err(domain("beta", beta, "must be finite"));
    }
    if beta == 1.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "use the one-sided limits",
        });
    }
    let f = f_of(x, beta)?;
    if beta > 1.0 {
        return Ok(StarvationBounds::NegativeInfinityRule {
            fairness: f,
            zero_users: x.zero_count(),
        });
    }
    Ok(StarvationBounds::Bounded {
        fairness: f,
        max_zero_users: x.len() as f64 - f,
        min_max_resource: x.total() / f,
        zero_users: x.zero_count(),
        max_resource: x.max(),
    })
}

/// `x̄ = (Σx / Σx^(1−β))^(1/β)`: raising `x_i` increases fairness iff
/// `x_i < x̄`.
pub fn threshold_resource(x: &Allocation, beta: f64) -> Result<f64> {
    check_regular_beta(beta)?;
    x.require_strictly_positive()?;
    // Σx^(1−β) = w^(1−β)·Σp^(1−β), so x̄ = w·(Σp^(1−β))^(−1/β).
    let ln_s = share_power_sum(x, 1.0 - beta).ln();
    Ok(x.total() * (-ln_s / beta).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEntry {
    pub index: usize,
    pub value: f64,
    pub derivative: f64,
    pub expected_sign: i8,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub threshold: f64,
    pub passed: bool,
    pub entries: Vec<ThresholdEntry>,
}

/// Entries this close to `x̄` (relative) have a derivative too small to
/// sign reliably and are accepted.
const THRESHOLD_BAND: f64 = 1e-6;

/// Central differences of `f_β` at every entry, compared with the sign of
/// `x̄ − x_i`.
pub fn threshold_self_check(x: &Allocation, beta: f64) -> Result<ThresholdCheck> {
    let threshold = threshold_resource(x, beta)?;
    let mut entries = Vec::with_capacity(x.len());
    for (i, &v) in x.values().iter().enumerate() {
        let h = 1e-6 * v;
        let mut up = x.values().to_vec();
        let mut down = up.clone();
        up[i] += h;
        down[i] -= h;
        let derivative =
            (f_of(&Allocation::new(up)?, beta)? - f_of(&Allocation::new(down)?, beta)?) / (2.0 * h);
        let expected_sign: i8 = if v < threshold { 1 } else { -1 };
        let near = (v - threshold).abs() <= THRESHOLD_BAND * threshold;
        let agrees = near || derivative.signum() as i8 == expected_sign;
        entries.push(ThresholdEntry {
            index: i,
            value: v,
            derivative,
            expected_sign,
            agrees,
        });
    }
    Ok(ThresholdCheck {
        threshold,
        passed: entries.iter().all(|e| e.agrees),
        entries,
    })
}

/// Every entry lies in `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxConstraint {
    x_min: f64,
    x_max: f64,
}

impl BoxConstraint {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min > 0.0) || !x_min.is_finite() {
            return Err(domain("x_min", x_min, "must be positive and finite"));
        }
        if !(x_max >= x_min) || !x_max.is_finite() {
            return Err(domain("x_max", x_max, "must be finite and >= x_min"));
        }
        Ok(BoxConstraint { x_min, x_max })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn gamma(&self) -> f64 {
        self.x_max / self.x_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxBound {
    pub bound: f64,
    /// `bound / n`.
    pub bound_per_user: f64,
    pub mu_star: Option<f64>,
    pub mu_used: f64,
    pub degenerate: bool,
    /// Smallest value over the realizable mixtures `μ = k/n`.
    pub grid_minimum: f64,
}

/// Value of `f_β` for `μn` users at `x_max` and the rest at `x_min`, as a
/// continuous function of `μ`.
fn mixture_value(gamma: f64, beta: f64, n: f64, mu: f64) -> f64 {
    let sign = if beta < 1.0 { 1.0 } else { -1.0 };
    let num = mu * gamma.powf(1.0 - beta) + 1.0 - mu;
    let den = (mu * gamma + 1.0 - mu).powf(1.0 - beta);
    sign * n * (num / den).powf(1.0 / beta)
}

/// Lower bound on `f_β(x)` over every `x` of length `n` inside the box.
///
/// The extremal allocations put each user at a box edge; relaxing the
/// fraction `μ` of users at `x_max` to a continuum gives the stationary
/// point `μ*`. When `μ*` leaves `(0, 1)` the bound falls back to the best
/// of `μ ∈ {0, 1, clamp(μ*)}`.
pub fn box_lower_bound(bx: BoxConstraint, beta: f64, n: usize) -> Result<BoxBound> {
    check_regular_beta(beta)?;
    if n == 0 {
        return Err(domain("n", 0.0, "need at least one user"));
    }
    let nf = n as f64;
    let gamma = bx.gamma();
    let grid_minimum = (0..=n)
        .map(|k| mixture_value(gamma, beta, nf, k as f64 / nf))
        .fold(f64::INFINITY, f64::min);
    if gamma == 1.0 {
        let bound = mixture_value(gamma, beta, nf, 0.0);
        return Ok(BoxBound {
            bound,
            bound_per_user: bound / nf,
            mu_star: None,
            mu_used: 0.0,
            degenerate: false,
            grid_minimum,
        });
    }
    let g1 = gamma.powf(1.0 - beta);
    let mu_star = (gamma - g1 - beta * (gamma - 1.0)) / (beta * (gamma - 1.0) * (g1 - 1.0));
    let degenerate = !(mu_star > 0.0 && mu_star < 1.0);
    let (mu_used, bound) = if degenerate {
        [0.0, 1.0, mu_star.clamp(0.0, 1.0)]
            .into_iter()
            .map(|m| (m, mixture_value(gamma, beta, nf, m)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three candidates")
    } else {
        (mu_star, mixture_value(gamma, beta, nf, mu_star))
    };
    Ok(BoxBound {
        bound,
        bound_per_user: bound / nf,
        mu_star: Some(mu_star),
        mu_used,
        degenerate,
        grid_minimum,
    })
}

/// Largest `n` accepted by [`box_enumeration_min`].
pub const MAX_ENUMERATION_USERS: usize = 24;

/// Minimum of `f_β` over all `2^n` assignments of users to the box edges.
pub fn box_enumeration_min(bx: BoxConstraint, beta: f64, n: usize) -> Result<f64> {
    check_regular_beta(beta)?;
    if n == 0 || n > MAX_ENUMERATION_USERS {
        return Err(domain("n", n as f64, "enumeration supports 1..=24 users"));
    }
    (0u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let v = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        bx.x_max
                    } else {
                        bx.x_min
                    }
                })
                .collect();
            Ok(fairness_unified(&Allocation::new(v)?, beta)?.value)
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub beta: f64,
    #[serde(serialize_with = "extended_real::serialize")]
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepViolation {
    pub beta_from: f64,
    pub beta_to: f64,
    pub f_from: f64,
    pub f_to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub excluded: Vec<f64>,
    pub passed: bool,
    pub violations: Vec<SweepViolation>,
}

/// Relative slack on the monotonicity comparisons.
pub const SWEEP_SLACK: f64 = 1e-12;

/// Evaluates `f_β` along a sorted grid and checks it is nondecreasing
/// below 1 and nonincreasing above 1. `β = 1` is dropped and reported in
/// `excluded`; `β = 0` uses the entropy limit.
pub fn beta_monotonicity_sweep(x: &Allocation, beta_grid: &[f64]) -> Result<SweepReport> {
    if let Some(&b) = beta_grid.iter().find(|b| !b.is_finite()) {
        return Err(domain("beta", b, "must be finite"));
    }
    if beta_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain(
            "beta_grid",
            f64::NAN,
            "grid must be sorted ascending",
        ));
    }
    let mut points = Vec::with_capacity(beta_grid.len());
    let mut excluded = Vec::new();
    for &beta in beta_grid {
        if beta == 1.0 {
            excluded.push(beta);
            continue;
        }
        points.push(SweepPoint {
            beta,
            f: f_of(x, beta)?,
        });
    }
    let mut violations = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let same_side = (a.beta < 1.0) == (b.beta < 1.0);
        if !same_side || a.f == b.f {
            continue;
        }
        let slack = SWEEP_SLACK * a.f.abs().max(1.0);
        let bad = if a.beta < 1.0 {
            b.f < a.f - slack
        } else {
            b.f > a.f + slack
        };
        if bad {
            violations.push(SweepViolation {
                beta_from: a.beta,
                beta_to: b.beta,
                f_from: a.f,
                f_to: b.f,
            });
        }
    }
    Ok(SweepReport {
        points,
        excluded,
        passed: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alloc(v: &[f64]) -> Allocation {
        Allocation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn starvation_examples() {
        match starvation_bounds(&alloc(&[99.0, 1.0, 0.0, 0.0, 0.0]), 0.5).unwrap() {
            StarvationBounds::Bounded {
                fairness,
                max_zero_users,
                zero_users,
                ..
            } => {
                let f = (0.99f64.sqrt() + 0.01f64.sqrt()).powi(2);
                assert!((fairness - f).abs() < 1e-14);
                assert!((max_zero_users - (5.0 - f)).abs() < 1e-14);
                assert!((max_zero_users - 3.801).abs() < 1e-3);
                assert!(zero_users as f64 <= max_zero_users);
            }
            other => panic!("{other:?}"),
        }
        match starvation_bounds(&alloc(&[1.0, 0.0]), -1.0).unwrap() {
            StarvationBounds::Bounded {
                max_zero_users,
                min_max_resource,
                ..
            } => {
                assert_eq!(max_zero_users, 1.0);
                assert_eq!(min_max_resource, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            starvation_bounds(&alloc(&[1.0, 0.0]), 2.0).unwrap(),
            StarvationBounds::NegativeInfinityRule { zero_users: 1, .. }
        ));
    }

    #[test]
    fn threshold_examples() {
        assert!((threshold_resource(&alloc(&[1.0, 3.0]), -1.0).unwrap() - 2.5).abs() < 1e-14);
        assert!(
            (threshold_resource(&Allocation::ones(4).unwrap(), 2.0).unwrap() - 1.0).abs() < 1e-14
        );
        let t = threshold_resource(&alloc(&[1.0, 2.0, 7.0]), 0.5).unwrap();
        assert!(t > 1.0 && t < 7.0);
        let check = threshold_self_check(&alloc(&[1.0, 3.0]), -1.0).unwrap();
        assert!(check.passed);
        assert!(check.entries[0].derivative > 0.0);
        assert!(check.entries[1].derivative < 0.0);
    }

    #[test]
    fn box_bound_examples() {
        let b = box_lower_bound(BoxConstraint::new(2.0, 2.0).unwrap(), 0.5, 7).unwrap();
        assert_eq!(b.bound, 7.0);
        let bx = BoxConstraint::new(1.0, 4.0).unwrap();
        let b = box_lower_bound(bx, -1.0, 10).unwrap();
        assert!((b.bound - 6.4).abs() < 1e-12);
        assert!((b.mu_star.unwrap() - 0.2).abs() < 1e-12);
        assert!((b.bound_per_user - 0.64).abs() < 1e-12);
        let brute = box_enumeration_min(bx, -1.0, 10).unwrap();
        assert!(b.bound <= brute + 1e-9 * brute.abs());
        let bx = BoxConstraint::new(1.0, 2.0).unwrap();
        let b = box_lower_bound(bx, 2.0, 6).unwrap();
        let brute = box_enumeration_min(bx, 2.0, 6).unwrap();
        assert!(b.bound <= brute + 1e-9 * brute.abs());
        assert!(b.bound < 0.0);
    }

    #[test]
    fn sweep_examples() {
        let grid: Vec<f64> = (0..=109).map(|k| -10.0 + 0.1 * k as f64).collect();
        let r = beta_monotonicity_sweep(&alloc(&[99.0, 1.0, 0.0, 0.0, 0.0]), &grid).unwrap();
        assert!(r.passed);
        let r = beta_monotonicity_sweep(
            &Allocation::ones(5).unwrap(),
            &[-3.0, -1.0, 0.0, 0.5, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(r.excluded, vec![1.0]);
        assert!(r.points[..4].iter().all(|p| p.f == 5.0));
        assert!(beta_monotonicity_sweep(&alloc(&[1.0, 2.0]), &[2.0, 1.5]).is_err());
    }
}
