//! α-fair utilities and their relation to the fairness family.
//!
//! `U_α(x) = Σ x_i^(1−α)/(1−α)` (or `Σ log x_i` at α = 1) factors as
//! `|f_β(x)|^β · U_β(Σ x_i)` with `β = α`. The scalarized objective
//! `Φ_λ(x) = λ·ℓ(f_β(x)) + ℓ(Σ x_i)` with `ℓ(y) = sign(y)·log|y|` keeps
//! Pareto dominance exactly when `λ ≤ |β/(1−β)|`.

use serde::Serialize;

use crate::allocation::{extended_real, Allocation};
use crate::error::{domain, Error, Result};
use crate::measures::{fairness_unified, share_power_sum};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain("alpha", alpha, "must be finite and >= 0"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(domain("lambda", lambda, "must be finite and >= 0"));
    }
    Ok(())
}

/// `β ∈ (0, 1) ∪ (1, ∞)`.
fn check_positive_beta(beta: f64) -> Result<()> {
    if beta == 1.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "the tradeoff threshold is unbounded at beta = 1",
        });
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain("beta", beta, "must be positive and finite"));
    }
    Ok(())
}

/// Scalar α-fair utility of a single amount.
pub fn scalar_utility(y: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        y.ln()
    } else if y == 0.0 && alpha > 1.0 {
        f64::NEG_INFINITY
    } else {
        y.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

/// `Σ_i U_α(x_i)`; `−∞` when `α ≥ 1` and some user has nothing.
pub fn alpha_utility(x: &Allocation, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha >= 1.0 && x.zero_count() > 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(x.values().iter().map(|&v| scalar_utility(v, alpha)).sum())
}

/// `∂U_α/∂x_i = x_i^(−α)`.
pub fn alpha_utility_gradient(x: &Allocation, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if alpha > 0.0 {
        x.require_strictly_positive()?;
    }
    Ok(x.values().iter().map(|&v| v.powf(-alpha)).collect())
}

/// Fairness and efficiency components `(|f_β(x)|^β, U_β(Σ x_i))`.
///
/// The first component is `Σ_i (x_i/w)^(1−β)`, computed directly rather
/// than by raising `|f_β|` back to the power `β`.
pub fn factorize(x: &Allocation, beta: f64) -> Result<(f64, f64)> {
    check_positive_beta(beta)?;
    if beta > 1.0 {
        x.require_strictly_positive()?;
    }
    let fairness = share_power_sum(x, 1.0 - beta).ln().exp();
    Ok((fairness, scalar_utility(x.total(), beta)))
}

/// `Φ_λ(x) = λ·sign(f)·log|f| + log(Σ x_i)`.
///
/// `λ = 0` returns `log(Σ x_i)` even when `f = −∞`.
pub fn tradeoff_objective(x: &Allocation, beta: f64, lambda: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    check_lambda(lambda)?;
    let ln_w = x.total().ln();
    if lambda == 0.0 {
        return Ok(ln_w);
    }
    let f = fairness_unified(x, beta)?.value;
    if f == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if f == 0.0 {
        return Err(domain("f", f, "sign(y) log|y| is undefined at 0"));
    }
    Ok(lambda * f.signum() * f.abs().ln() + ln_w)
}

/// `∇Φ_λ` for strictly positive `x`:
/// `λ·(|1−β|/β)·(x_i^(−β)/Σ_j x_j^(1−β) − 1/w) + 1/w`.
pub fn tradeoff_gradient(x: &Allocation, beta: f64, lambda: f64) -> Result<Vec<f64>> {
    check_positive_beta(beta)?;
    check_lambda(lambda)?;
    x.require_strictly_positive()?;
    let w = x.total();
    let ln_s = share_power_sum(x, 1.0 - beta).ln();
    let c = lambda * (1.0 - beta).abs() / beta;
    Ok(x.values()
        .iter()
        .map(|&v| {
            let t = (-beta * (v / w).ln() - ln_s).exp();
            (c * (t - 1.0) + 1.0) / w
        })
        .collect())
}

/// Largest `λ` for which maximizing `Φ_λ` keeps Pareto dominance.
pub fn pareto_lambda_max(beta: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    Ok((beta / (1.0 - beta)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParetoFlag {
    Preserved,
    AtRisk,
}

impl ParetoFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ParetoFlag::Preserved => "preserved",
            ParetoFlag::AtRisk => "at_risk",
        }
    }
}

/// Slack on the threshold comparison.
pub const PARETO_FLAG_SLACK: f64 = 1e-12;

pub fn pareto_flag(beta: f64, lambda: f64) -> Result<ParetoFlag> {
    check_lambda(lambda)?;
    Ok(if lambda <= pareto_lambda_max(beta)? + PARETO_FLAG_SLACK {
        ParetoFlag::Preserved
    } else {
        ParetoFlag::AtRisk
    })
}

/// `Φ_λ` weight equivalent to maximizing `F_{β,λ} = f_β·w^d`.
///
/// Maximizing `F` is the same as maximizing `Φ_{1/|d|}` when `d` has the
/// sign of `1 − β`; otherwise `F` rewards throughput in the wrong
/// direction and no equivalent weight exists.
pub fn equivalent_tradeoff_weight(beta: f64, degree: f64) -> Result<Option<f64>> {
    check_positive_beta(beta)?;
    if !degree.is_finite() {
        return Err(domain("lambda_inv", degree, "must be finite"));
    }
    if degree == 0.0 || degree.signum() != (1.0 - beta).signum() {
        return Ok(None);
    }
    Ok(Some(1.0 / degree.abs()))
}

/// Pareto flag for using `F_{β,λ}` with homogeneity degree `d` as an
/// objective: preserved iff `sign(d) = sign(1−β)` and `1/|d| ≤ |β/(1−β)|`.
pub fn homogeneous_pareto_flag(beta: f64, degree: f64) -> Result<ParetoFlag> {
    match equivalent_tradeoff_weight(beta, degree)? {
        Some(lambda) => pareto_flag(beta, lambda),
        None => Ok(ParetoFlag::AtRisk),
    }
}

/// Degree of homogeneity at which `F_{β,λ}` orders allocations like the
/// α-fair utility with `α = β`: `(1−β)/β`.
pub fn alpha_utility_degree(beta: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    Ok((1.0 - beta) / beta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoCounterexample {
    pub x: Allocation,
    pub x_prime: Allocation,
    pub delta: f64,
    #[serde(serialize_with = "extended_real::serialize")]
    pub phi_x: f64,
    #[serde(serialize_with = "extended_real::serialize")]
    pub phi_x_prime: f64,
}

/// A Pareto-dominating pair `x′ ≥ x` with `Φ_λ(x′) < Φ_λ(x)` for
/// `λ > |β/(1−β)|`, over `n + 1` users.
///
/// For `β > 1` the pair is `x = [1, …, 1, n]` and `x′` with last entry
/// `n + δ·Σx`, `δ = 2K − 1` with `K = (1 + n^(−β))^(λ/(λ(β−1)−β))`. Then
/// `1 + δ = 2K` and `Φ_λ(x′) − Φ_λ(x) ≤ −(λ(β−1)/β − 1)·ln 2`. Fails when
/// `λ` sits so close to the threshold that `δ` overflows.
///
/// For `β < 1` the pair puts `n` equal small users next to one large user,
/// scans the large user's share for a point where raising it lowers `Φ_λ`,
/// then halves the raise until `Φ_λ` drops. Such a point only exists once
/// `n` is large enough for the given `λ`; smaller `n` is rejected.
pub fn pareto_counterexample(beta: f64, lambda: f64, n: usize) -> Result<ParetoCounterexample> {
    let lambda_max = pareto_lambda_max(beta)?;
    check_lambda(lambda)?;
    if !(lambda > lambda_max) {
        return Err(domain("lambda", lambda, "must exceed |beta/(1-beta)|"));
    }
    if n < 2 {
        return Err(domain("n", n as f64, "need n >= 2"));
    }
    if beta > 1.0 {
        spike_pair(beta, lambda, n)
    } else {
        searched_pair(beta, lambda, n)
    }
}

fn spike_pair(beta: f64, lambda: f64, n: usize) -> Result<ParetoCounterexample> {
    let nf = n as f64;
    let mut v = vec![1.0; n];
    v.push(nf);
    let x = Allocation::new(v)?;
    let ln_k = lambda / (lambda * (beta - 1.0) - beta) * nf.powf(-beta).ln_1p();
    let delta = 2.0 * ln_k.exp() - 1.0;
    if !delta.is_finite() {
        return Err(domain(
            "lambda",
            lambda,
            "too close to the threshold for this n",
        ));
    }
    let mut vp = x.values().to_vec();
    vp[n] = nf + delta * x.total();
    let x_prime = Allocation::new(vp)?;
    Ok(ParetoCounterexample {
        phi_x: tradeoff_objective(&x, beta, lambda)?,
        phi_x_prime: tradeoff_objective(&x_prime, beta, lambda)?,
        x,
        x_prime,
        delta,
    })
}

fn searched_pair(beta: f64, lambda: f64, n: usize) -> Result<ParetoCounterexample> {
    let nf = n as f64;
    // Directional derivative along the large user, scaled by w:
    // λ(1−β)/β·(t − 1) + 1 with t = p^(−β) / Σ_j p_j^(1−β).
    let c = lambda * (1.0 - beta) / beta;
    let slope = |p: f64| {
        let small = (1.0 - p) / nf;
        let t = p.powf(-beta) / (p.powf(1.0 - beta) + nf * small.powf(1.0 - beta));
        c * (t - 1.0) + 1.0
    };
    let best = (1..2000)
        .map(|k| k as f64 / 2000.0)
        .min_by(|a, b| slope(*a).total_cmp(&slope(*b)))
        .expect("non-empty grid");
    if slope(best) >= 0.0 {
        return Err(domain(
            "n",
            nf,
            "too few users for a violation at this lambda",
        ));
    }
    let small = (1.0 - best) / nf;
    let mut v = vec![small; n];
    v.push(best);
    let x = Allocation::new(v)?;
    let phi_x = tradeoff_objective(&x, beta, lambda)?;
    let mut delta = 0.5;
    for _ in 0..200 {
        let mut vp = x.values().to_vec();
        vp[n] += delta * x.total();
        let x_prime = Allocation::new(vp)?;
        let phi_x_prime = tradeoff_objective(&x_prime, beta, lambda)?;
        if phi_x_prime < phi_x {
            return Ok(ParetoCounterexample {
                x,
                x_prime,
                delta,
                phi_x,
                phi_x_prime,
            });
        }
        delta *= 0.5;
    }
    Err(Error::Solver("no decreasing step found".into()))
}

/// Gradient of `U_α`, the fairness direction `η` and the reward ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub alpha: f64,
    #[serde(serialize_with = "extended_real::serialize_vec")]
    pub gradient: Vec<f64>,
    pub eta: Vec<f64>,
    pub ratio: f64,
}

/// Ratio of the directional derivatives of `U_α` along `η/‖η‖` and along
/// `1_n/√n`, with `η = 1_n/n − x/Σx`.
///
/// The gradient is rescaled by `x_min^α` inside the ratio (the ratio is
/// scale free), and the numerator uses `g − mean(g)` since `η ⊥ 1_n`, so
/// `α = 0` yields exactly zero.
pub fn reward_ratio(x: &Allocation, alpha: f64) -> Result<GradientReport> {
    check_alpha(alpha)?;
    x.require_strictly_positive()?;
    if x.positive_entries_equal() {
        return Err(Error::EtaDegenerate);
    }
    let n = x.len() as f64;
    let w = x.total();
    let eta: Vec<f64> = x.values().iter().map(|&v| 1.0 / n - v / w).collect();
    let eta_norm = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
    if eta_norm == 0.0 {
        return Err(Error::EtaDegenerate);
    }
    let x_min = x.min();
    let scaled: Vec<f64> = x
        .values()
        .iter()
        .map(|&v| (v / x_min).powf(-alpha))
        .collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let numerator = scaled
        .iter()
        .zip(&eta)
        .map(|(g, e)| (g - mean) * e)
        .sum::<f64>()
        / eta_norm;
    let denominator = scaled.iter().sum::<f64>() / n.sqrt();
    Ok(GradientReport {
        alpha,
        gradient: alpha_utility_gradient(x, alpha)?,
        eta,
        ratio: numerator / denominator,
    })
}
