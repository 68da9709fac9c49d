//! Closed-form members of the power-generated fairness family.
//!
//! The unified measure is
//!
//! ```text
//! f_β(x) = sign(1−β) · [ Σ_i (x_i / Σ_j x_j)^(1−β) ]^(1/β)
//! ```
//!
//! with the entropy limit at `β → 0`, the max/min ratio limits at
//! `β → ±∞`, and a jump between `+n` and `−n` at `β = 1`. Every function
//! here is pure.

use serde::Serialize;

use crate::allocation::{extended_real, Allocation};
use crate::error::{domain, Error, Result};

/// Above this magnitude of `|exponent| · ln(w / min x)` the share power sum
/// is accumulated in log space.
pub const LOG_SPACE_THRESHOLD: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularCase {
    None,
    BetaOne,
    BetaZeroLimit,
    PlusInfLimit,
    MinusInfLimit,
}

/// Result of a fairness evaluation.
///
/// `sign` is the sign convention of the branch that produced the value
/// (`sign(1−β)` for the unified measure), recorded even when the value is
/// `−∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairnessValue {
    #[serde(serialize_with = "extended_real::serialize")]
    pub value: f64,
    pub sign: i8,
    pub singular: SingularCase,
}

impl FairnessValue {
    fn regular(value: f64, sign: i8) -> Self {
        FairnessValue {
            value,
            sign,
            singular: SingularCase::None,
        }
    }

    pub fn get(&self) -> f64 {
        self.value
    }

    pub fn is_neg_infinite(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

/// Parameter bundle selecting a member of the family.
///
/// `rho = 1 − beta·r` is always derived, never stored, so the consistency
/// condition between the partition weight exponent and the growth exponent
/// holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairnessParams {
    pub beta: f64,
    pub r: f64,
    pub lambda_inv: f64,
}

impl FairnessParams {
    pub fn new(beta: f64) -> Self {
        FairnessParams {
            beta,
            r: 1.0,
            lambda_inv: 0.0,
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_lambda_inv(mut self, lambda_inv: f64) -> Self {
        self.lambda_inv = lambda_inv;
        self
    }

    pub fn rho(&self) -> f64 {
        1.0 - self.beta * self.r
    }

    pub fn singularity(&self) -> SingularCase {
        if self.beta * self.r == 1.0 {
            SingularCase::BetaOne
        } else if self.beta == 0.0 {
            SingularCase::BetaZeroLimit
        } else {
            SingularCase::None
        }
    }

    /// Evaluates `F_{β,λ}` with growth exponent `r`. `β = 0` routes to the
    /// entropy limit (raised to `r`).
    pub fn evaluate(&self, x: &Allocation) -> Result<FairnessValue> {
        check_finite("r", self.r)?;
        check_finite("lambda_inv", self.lambda_inv)?;
        let base = if self.beta == 0.0 {
            let e = fairness_entropy_limit(x)?;
            FairnessValue {
                value: e.value.powf(self.r),
                ..e
            }
        } else if self.r == 1.0 {
            fairness_unified(x, self.beta)?
        } else {
            fairness_general(x, self.beta, self.r)?
        };
        if self.lambda_inv == 0.0 {
            return Ok(base);
        }
        Ok(FairnessValue {
            value: base.value * x.total().powf(self.lambda_inv),
            ..base
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioLimit {
    PlusInf,
    MinusInf,
}

/// `Σ_{x_i>0} p_i^e` in whichever representation avoids overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SharePowerSum {
    Direct(f64),
    Log(f64),
    Infinite,
}

impl SharePowerSum {
    pub(crate) fn ln(self) -> f64 {
        match self {
            SharePowerSum::Direct(s) => s.ln(),
            SharePowerSum::Log(l) => l,
            SharePowerSum::Infinite => f64::INFINITY,
        }
    }

    /// `S^(1/β)`.
    pub(crate) fn root(self, beta: f64) -> f64 {
        match self {
            SharePowerSum::Direct(s) => s.powf(1.0 / beta),
            SharePowerSum::Log(l) => (l / beta).exp(),
            SharePowerSum::Infinite => f64::INFINITY,
        }
    }
}

pub(crate) fn share_power_sum(x: &Allocation, exponent: f64) -> SharePowerSum {
    if exponent < 0.0 && x.zero_count() > 0 {
        return SharePowerSum::Infinite;
    }
    let w = x.total();
    let sorted = x.ascending();
    let positives = sorted.iter().copied().filter(|&v| v > 0.0);
    let worst_log_share = (w / x.min_positive()).ln();
    if exponent.abs() * worst_log_share > LOG_SPACE_THRESHOLD {
        let ln_w = w.ln();
        let terms: Vec<f64> = positives.map(|v| exponent * (v.ln() - ln_w)).collect();
        SharePowerSum::Log(log_sum_exp(&terms))
    } else {
        SharePowerSum::Direct(positives.map(|v| (v / w).powf(exponent)).sum())
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(domain(name, v, "must be finite"))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    check_finite("beta", beta)?;
    if beta == 0.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "use the entropy limit operation",
        });
    }
    if beta == 1.0 {
        return Err(Error::SingularBeta {
            beta,
            hint:
                "f is discontinuous here (+n from below, -n from above); use the one-sided limits",
        });
    }
    Ok(())
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

/// The unified measure `f_β` (growth exponent `r = 1`).
///
/// Zero entries contribute nothing for `β < 1` and force `−∞` for `β > 1`.
pub fn fairness_unified(x: &Allocation, beta: f64) -> Result<FairnessValue> {
    check_beta(beta)?;
    let sign = sign_of(1.0 - beta);
    if beta > 1.0 && x.zero_count() > 0 {
        return Ok(FairnessValue::regular(f64::NEG_INFINITY, sign));
    }
    // Equal positive entries: the sum collapses to m^β exactly.
    if x.positive_entries_equal() {
        let m = x.positive_count() as f64;
        return Ok(FairnessValue::regular(f64::from(sign) * m, sign));
    }
    let magnitude = share_power_sum(x, 1.0 - beta).root(beta);
    Ok(FairnessValue::regular(f64::from(sign) * magnitude, sign))
}

/// The general measure `f_{β,r}` with `f(1_n) = n^r`.
pub fn fairness_general(x: &Allocation, beta: f64, r: f64) -> Result<FairnessValue> {
    check_finite("r", r)?;
    check_finite("beta", beta)?;
    let br = beta * r;
    if beta == 0.0 || br == 0.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "beta*r = 0 is the entropy limit",
        });
    }
    if br == 1.0 {
        return Err(Error::SingularBeta {
            beta,
            hint: "beta*r = 1 is the discontinuity of the family",
        });
    }
    let exponent = 1.0 - br;
    let sign = sign_of(exponent);
    if exponent < 0.0 && x.zero_count() > 0 {
        return Ok(FairnessValue::regular(f64::NEG_INFINITY, sign));
    }
    if x.positive_entries_equal() {
        let m = x.positive_count() as f64;
        return Ok(FairnessValue::regular(f64::from(sign) * m.powf(r), sign));
    }
    let magnitude = share_power_sum(x, exponent).root(beta);
    Ok(FairnessValue::regular(f64::from(sign) * magnitude, sign))
}

/// Shannon entropy (natural log) of the shares, with `0·ln 0 = 0`.
pub fn share_entropy(x: &Allocation) -> f64 {
    let w = x.total();
    -x.ascending()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / w;
            p * p.ln()
        })
        .sum::<f64>()
}

/// The `β → 0` member: `exp(H(x / w(x)))`.
pub fn fairness_entropy_limit(x: &Allocation) -> Result<FairnessValue> {
    let value = if x.positive_entries_equal() {
        x.positive_count() as f64
    } else {
        share_entropy(x).exp()
    };
    Ok(FairnessValue {
        value,
        sign: 1,
        singular: SingularCase::BetaZeroLimit,
    })
}

/// The `β → ±∞` members: `−max_i w/x_i` and `min_i w/x_i`.
pub fn fairness_ratio_limits(x: &Allocation, direction: RatioLimit) -> Result<FairnessValue> {
    let w = x.total();
    Ok(match direction {
        RatioLimit::PlusInf => FairnessValue {
            value: if x.zero_count() > 0 {
                f64::NEG_INFINITY
            } else {
                -(w / x.min())
            },
            sign: -1,
            singular: SingularCase::PlusInfLimit,
        },
        RatioLimit::MinusInf => FairnessValue {
            value: w / x.max(),
            sign: 1,
            singular: SingularCase::MinusInfLimit,
        },
    })
}

/// One-sided limits at the discontinuity `β = 1`: `(β → 1⁻, β → 1⁺)`.
///
/// From below every active user contributes a share to the power zero, so
/// the limit is the number of active users. From above it is `−n`, or `−∞`
/// when someone is starved.
pub fn beta_one_limits(x: &Allocation) -> (FairnessValue, FairnessValue) {
    let below = FairnessValue {
        value: x.positive_count() as f64,
        sign: 1,
        singular: SingularCase::BetaOne,
    };
    let above = FairnessValue {
        value: if x.zero_count() > 0 {
            f64::NEG_INFINITY
        } else {
            -(x.len() as f64)
        },
        sign: -1,
        singular: SingularCase::BetaOne,
    };
    (below, above)
}

/// Generalized Jain's index `J_β = f_β / n`, defined for `β < 1`.
///
/// `β = 0` uses the entropy limit. The result lies in `[1/n, 1]`.
pub fn jain_generalized(x: &Allocation, beta: f64) -> Result<f64> {
    check_finite("beta", beta)?;
    if beta > 1.0 {
        return Err(domain(
            "beta",
            beta,
            "generalized Jain's index needs beta <= 1",
        ));
    }
    let f = if beta == 0.0 {
        fairness_entropy_limit(x)?
    } else {
        fairness_unified(x, beta)?
    };
    Ok(f.value / x.len() as f64)
}

/// `F_{β,λ}(x) = f_β(x) · (Σ x_i)^(1/λ)`, homogeneous of degree `lambda_inv`.
pub fn fairness_homogeneous(x: &Allocation, beta: f64, lambda_inv: f64) -> Result<f64> {
    check_finite("lambda_inv", lambda_inv)?;
    let f = fairness_unified(x, beta)?.value;
    if lambda_inv == 0.0 {
        return Ok(f);
    }
    Ok(f * x.total().powf(lambda_inv))
}

/// Analytic gradient `∂f_β/∂x_i` for strictly positive `x`.
///
/// `∂f/∂x_i = f · ((1−β)/β) · (p_i^(−β) / Σ_j p_j^(1−β) − 1) / w`.
pub fn fairness_gradient(x: &Allocation, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    x.require_strictly_positive()?;
    let f = fairness_unified(x, beta)?.value;
    let w = x.total();
    let ln_sum = share_power_sum(x, 1.0 - beta).ln();
    let coef = f * (1.0 - beta) / beta / w;
    Ok(x.values()
        .iter()
        .map(|&v| {
            let ratio = (-beta * (v / w).ln() - ln_sum).exp();
            coef * (ratio - 1.0)
        })
        .collect())
}

/// Analytic gradient of the entropy limit `exp(H)`.
pub fn entropy_gradient(x: &Allocation) -> Result<Vec<f64>> {
    x.require_strictly_positive()?;
    let w = x.total();
    let h = share_entropy(x);
    let f = h.exp();
    Ok(x.values()
        .iter()
        .map(|&v| f * (-(v / w).ln() - h) / w)
        .collect())
}
