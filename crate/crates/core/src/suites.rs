//! Property suites beyond the axiom and Schur checks, plus the combined
//! `verify` entry point used by the CLI.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::alpha::{pareto_counterexample, pareto_lambda_max, reward_ratio, tradeoff_objective};
use crate::axioms::{verify_axioms, AxiomReport, VerifyOptions};
use crate::bounds::{
    beta_monotonicity_sweep, box_enumeration_min, box_lower_bound, starvation_bounds,
    threshold_self_check, BoxConstraint, StarvationBounds,
};
use crate::error::{domain, Result};
use crate::majorization::{schur_concavity_suite, SchurReport};
use crate::report::Check;
use crate::sampling::{allocation_with_zeros, positive_allocation, trial_rng, unequal_allocation};
use crate::Allocation;

/// `β` values used by the Pareto suite.
pub const PARETO_BETAS: [f64; 5] = [0.5, 0.75, 1.5, 2.0, 3.0];
/// Users in the `β > 1` counterexamples.
pub const PARETO_SIZES: [usize; 3] = [2, 4, 8];
/// Users in the `β < 1` counterexamples, which need a crowd of small users.
pub const PARETO_SIZE_BELOW_ONE: usize = 64;

/// Default `β` grid for the axiom and Schur suites.
pub const DEFAULT_BETA_GRID: [f64; 9] = [-4.0, -2.5, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(seed: u64, trials: usize, checks: Vec<Check>) -> Self {
        SuiteReport {
            seed,
            trials,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(domain("trials", 0.0, "must be positive"));
    }
    Ok(())
}

/// Adds a random nonnegative increment to `x` with at least one strictly
/// positive entry.
fn dominating<R: Rng>(rng: &mut R, x: &Allocation) -> Allocation {
    let n = x.len();
    let forced = rng.gen_range(0..n);
    let v = x
        .values()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            if i == forced || rng.gen_bool(0.5) {
                xi * (1.0 + rng.gen_range(0.01..1.0))
            } else {
                xi
            }
        })
        .collect();
    Allocation::new(v).expect("increments keep entries positive")
}

/// Both directions of the Pareto threshold.
///
/// Just below `λ* = |β/(1−β)|`, random dominating pairs must raise `Φ_λ`.
/// At `1.5·λ*` the counterexample construction must lower it.
pub fn pareto_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let below = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let n = rng.gen_range(2..=8);
            let x = positive_allocation(&mut rng, n);
            let y = dominating(&mut rng, &x);
            let mut check = Check::new("dominated_pair_gains");
            for beta in PARETO_BETAS {
                let lambda = pareto_lambda_max(beta)? * (1.0 - 1e-6);
                let gain =
                    tradeoff_objective(&y, beta, lambda)? - tradeoff_objective(&x, beta, lambda)?;
                check.record((-gain).max(0.0), gain > 0.0);
            }
            Ok(check)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Check::new("dominated_pair_gains"), Check::merge);

    let mut above = Check::new("counterexample_above_threshold");
    for beta in PARETO_BETAS {
        let lambda = 1.5 * pareto_lambda_max(beta)?;
        let sizes: &[usize] = if beta > 1.0 {
            &PARETO_SIZES
        } else {
            &[PARETO_SIZE_BELOW_ONE]
        };
        for &n in sizes {
            let c = pareto_counterexample(beta, lambda, n)?;
            let dominates = c
                .x_prime
                .values()
                .iter()
                .zip(c.x.values())
                .all(|(a, b)| a >= b);
            let drop = c.phi_x - c.phi_x_prime;
            above.record((-drop).max(0.0), dominates && drop > 0.0);
        }
    }
    Ok(SuiteReport::new(seed, trials, vec![below, above]))
}

/// Grid of `count` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|k| lo + step * k as f64).collect()
}

/// Relative slack on the ratio monotonicity comparisons.
pub const RATIO_SLACK: f64 = 1e-12;

/// The reward ratio is exactly zero at `α = 0` and nondecreasing on a
/// 50-point grid over `[0, 8]`.
pub fn ratio_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let grid = linear_grid(0.0, 8.0, 50);
    let (zero, monotone) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let n = rng.gen_range(2..=8);
            let x = unequal_allocation(&mut rng, n);
            let ratios = grid
                .iter()
                .map(|&a| reward_ratio(&x, a).map(|r| r.ratio))
                .collect::<Result<Vec<_>>>()?;
            let mut zero = Check::new("zero_at_alpha_zero");
            zero.record(ratios[0].abs(), ratios[0] == 0.0);
            let mut monotone = Check::new("nondecreasing_in_alpha");
            for w in ratios.windows(2) {
                let dip = (w[0] - w[1]).max(0.0);
                monotone.record(dip, dip <= RATIO_SLACK * w[0].abs().max(1.0));
            }
            Ok((zero, monotone))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(
            (
                Check::new("zero_at_alpha_zero"),
                Check::new("nondecreasing_in_alpha"),
            ),
            |(z, m), (a, b)| (z.merge(a), m.merge(b)),
        );
    Ok(SuiteReport::new(seed, trials, vec![zero, monotone]))
}

pub const BOX_GAMMAS: [f64; 2] = [2.0, 4.0];
pub const BOX_BETAS: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 2.0, 3.0];
pub const BOX_MAX_USERS: usize = 12;

/// Relative slack on the bound comparisons.
pub const BOUNDS_SLACK: f64 = 1e-9;

/// Box bound against exhaustive enumeration, threshold derivative signs,
/// starvation bounds and monotonicity in `β`.
pub fn bounds_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let mut box_check = Check::new("box_bound_below_enumeration");
    let mut grid_check = Check::new("enumeration_matches_mu_grid");
    let cases: Vec<(f64, f64, usize)> = BOX_GAMMAS
        .iter()
        .flat_map(|&g| BOX_BETAS.iter().map(move |&b| (g, b)))
        .flat_map(|(g, b)| (1..=BOX_MAX_USERS).map(move |n| (g, b, n)))
        .collect();
    for (gamma, beta, n) in cases {
        let bx = BoxConstraint::new(1.0, gamma)?;
        let bound = box_lower_bound(bx, beta, n)?;
        let enumerated = box_enumeration_min(bx, beta, n)?;
        let scale = enumerated.abs().max(1.0);
        let excess = (bound.bound - enumerated) / scale;
        box_check.record(excess.max(0.0), excess <= BOUNDS_SLACK);
        let mismatch = (bound.grid_minimum - enumerated).abs() / scale;
        grid_check.record(mismatch, mismatch <= BOUNDS_SLACK);
    }

    let betas = [-2.0, -0.5, 0.5, 2.0, 3.0];
    let sweep_grid: Vec<f64> = linear_grid(-10.0, 5.0, 61);
    let partials = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let n = rng.gen_range(2..=8);
            let x = positive_allocation(&mut rng, n);
            let mut threshold = Check::new("threshold_derivative_sign");
            for beta in betas {
                let c = threshold_self_check(&x, beta)?;
                threshold.record(if c.passed { 0.0 } else { 1.0 }, c.passed);
            }
            let z = allocation_with_zeros(&mut rng, n, 0.4);
            let mut starvation = Check::new("starvation_bounds");
            for beta in [-2.0, -0.5, 0.0, 0.5] {
                if let StarvationBounds::Bounded {
                    max_zero_users,
                    min_max_resource,
                    zero_users,
                    max_resource,
                    ..
                } = starvation_bounds(&z, beta)?
                {
                    let over_zero = zero_users as f64 - max_zero_users;
                    let under_max = (min_max_resource - max_resource) / max_resource;
                    let err = over_zero.max(under_max).max(0.0);
                    starvation.record(err, err <= BOUNDS_SLACK);
                }
            }
            let sweep = beta_monotonicity_sweep(&x, &sweep_grid)?;
            let mut monotone = Check::new("monotone_in_beta");
            monotone.record(sweep.violations.len() as f64, sweep.passed);
            Ok(vec![threshold, starvation, monotone])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checks = vec![box_check, grid_check];
    checks.extend(
        partials
            .into_iter()
            .reduce(|acc, p| acc.into_iter().zip(p).map(|(a, b)| a.merge(b)).collect())
            .expect("trials > 0"),
    );
    Ok(SuiteReport::new(seed, trials, checks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Axioms,
    Schur,
    Pareto,
    Ratio,
    Bounds,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub beta_grid: Vec<f64>,
    pub axioms: VerifyOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: Suite::All,
            seed: 0,
            trials: 200,
            beta_grid: DEFAULT_BETA_GRID.to_vec(),
            axioms: VerifyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schur: Option<SchurReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pareto: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<SuiteReport>,
}

/// Strictly positive samples for the axiom suite, sizes 2 to 8.
pub fn axiom_samples(count: usize, seed: u64) -> Vec<Allocation> {
    (0..count)
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let n = rng.gen_range(2..=8);
            positive_allocation(&mut rng, n)
        })
        .collect()
}

/// Runs the selected suites with one seed.
pub fn verify(config: &VerifyConfig) -> Result<VerifyReport> {
    check_trials(config.trials)?;
    let want = |s: Suite| config.suite == Suite::All || config.suite == s;
    let seed = config.seed;
    let axioms = if want(Suite::Axioms) {
        let samples = axiom_samples(config.trials, seed);
        let opts = VerifyOptions {
            seed,
            ..config.axioms
        };
        Some(verify_axioms(&samples, &config.beta_grid, opts)?)
    } else {
        None
    };
    let schur = want(Suite::Schur)
        .then(|| schur_concavity_suite(&config.beta_grid, config.trials, seed))
        .transpose()?;
    let pareto = want(Suite::Pareto)
        .then(|| pareto_suite(config.trials, seed))
        .transpose()?;
    let ratio = want(Suite::Ratio)
        .then(|| ratio_suite(config.trials, seed))
        .transpose()?;
    let bounds = want(Suite::Bounds)
        .then(|| bounds_suite(config.trials, seed))
        .transpose()?;
    let passed = axioms.as_ref().is_none_or(|r| r.passed)
        && schur.as_ref().is_none_or(|r| r.passed)
        && [&pareto, &ratio, &bounds]
            .iter()
            .all(|r| r.as_ref().is_none_or(|r| r.passed));
    Ok(VerifyReport {
        seed,
        passed,
        axioms,
        schur,
        pareto,
        ratio,
        bounds,
    })
}
