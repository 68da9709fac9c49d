//! Independent reference implementations. Deliberately naive: plain loops,
//! no log-space tricks, nothing shared with the library's numerics.
#![allow(dead_code)]

use rayon::prelude::*;

pub fn sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

/// `sign(1−β)·(Σ (x_i/w)^(1−β))^(1/β)` with `0^e` left to `powf`.
pub fn naive_f(x: &[f64], beta: f64) -> f64 {
    naive_general(x, beta, 1.0)
}

/// `sign(1−βr)·(Σ (x_i/w)^(1−βr))^(1/β)`.
pub fn naive_general(x: &[f64], beta: f64, r: f64) -> f64 {
    let w = sum(x);
    let e = 1.0 - beta * r;
    let mut s = 0.0;
    for &v in x {
        if v > 0.0 {
            s += (v / w).powf(e);
        } else if e < 0.0 {
            s = f64::INFINITY;
        }
    }
    let sign = if e > 0.0 { 1.0 } else { -1.0 };
    sign * s.powf(1.0 / beta)
}

/// `(Σx)² / Σx²`, the unnormalized Jain index.
pub fn jain_unnormalized(x: &[f64]) -> f64 {
    let s = sum(x);
    let sq: f64 = x.iter().map(|v| v * v).sum();
    s * s / sq
}

/// Classic Jain index `(Σx)² / (n·Σx²)`.
pub fn jain_classic(x: &[f64]) -> f64 {
    jain_unnormalized(x) / x.len() as f64
}

pub fn exp_entropy(x: &[f64]) -> f64 {
    let w = sum(x);
    let mut h = 0.0;
    for &v in x {
        if v > 0.0 {
            let p = v / w;
            h -= p * p.ln();
        }
    }
    h.exp()
}

/// `Σ U_α(x_i)` with `U_α(y) = y^(1−α)/(1−α)` and `log y` at `α = 1`.
pub fn utility_sum(x: &[f64], alpha: f64) -> f64 {
    x.iter()
        .map(|&v| {
            if alpha == 1.0 {
                v.ln()
            } else {
                v.powf(1.0 - alpha) / (1.0 - alpha)
            }
        })
        .sum()
}

/// `λ·sign(f)·ln|f| + ln Σx` with `f` from [`naive_f`].
pub fn naive_phi(x: &[f64], beta: f64, lambda: f64) -> f64 {
    let f = naive_f(x, beta);
    let lf = f.signum() * f.abs().ln();
    if lambda == 0.0 {
        sum(x).ln()
    } else {
        lambda * lf + sum(x).ln()
    }
}

/// Minimum of `f_β` over all `2^n` assignments of users to `lo` or `hi`.
pub fn box_brute_force(lo: f64, hi: f64, beta: f64, n: usize) -> f64 {
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if mask >> i & 1 == 1 { hi } else { lo };
        }
        best = best.min(naive_f(&x, beta));
    }
    best
}

/// The box mixture `sign(1−β)·n·[(μΓ^(1−β)+1−μ)/(μΓ+1−μ)^(1−β)]^(1/β)`
/// minimized over `μ = k/n`.
pub fn box_mu_grid_min(gamma: f64, beta: f64, n: usize) -> f64 {
    let sign = if beta < 1.0 { 1.0 } else { -1.0 };
    (0..=n)
        .map(|k| {
            let mu = k as f64 / n as f64;
            let num = mu * gamma.powf(1.0 - beta) + 1.0 - mu;
            let den = (mu * gamma + 1.0 - mu).powf(1.0 - beta);
            sign * n as f64 * (num / den).powf(1.0 / beta)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Central difference of `g` along coordinate `i` with step `h·x_i`.
pub fn central_diff(g: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let step = h * x[i];
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += step;
    down[i] -= step;
    (g(&up) - g(&down)) / (2.0 * step)
}

pub fn fd_gradient(g: impl Fn(&[f64]) -> f64 + Copy, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len()).map(|i| central_diff(g, x, i, h)).collect()
}

/// Largest componentwise gap relative to the largest component.
pub fn max_rel_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }
}

/// Per-point `(sign(f)·ln|f|, ln Σx)` on the lattice `k·pitch`, `k ≥ 1`,
/// inside `{Ax ≤ b}` for two users.
pub struct GridOracle {
    points: Vec<([f64; 2], f64, f64)>,
}

impl GridOracle {
    pub fn new(a: &[Vec<f64>], b: &[f64], upper: [f64; 2], beta: f64, pitch: f64) -> Self {
        let nx = (upper[0] / pitch).round() as usize + 1;
        let ny = (upper[1] / pitch).round() as usize + 1;
        let points = (1..=nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                (1..=ny).filter_map(move |j| {
                    let x = [i as f64 * pitch, j as f64 * pitch];
                    let feasible = a
                        .iter()
                        .zip(b)
                        .all(|(row, &bi)| row[0] * x[0] + row[1] * x[1] <= bi + 1e-12);
                    if !feasible {
                        return None;
                    }
                    let f = naive_f(&x, beta);
                    Some((x, f.signum() * f.abs().ln(), (x[0] + x[1]).ln()))
                })
            })
            .collect();
        GridOracle { points }
    }

    /// Best `Φ_λ` over the lattice and where it is attained.
    pub fn best(&self, lambda: f64) -> ([f64; 2], f64) {
        self.points
            .iter()
            .map(|&(x, lf, lw)| (x, lambda * lf + lw))
            .fold(([0.0; 2], f64::NEG_INFINITY), |acc, p| {
                if p.1 > acc.1 {
                    p
                } else {
                    acc
                }
            })
    }
}

/// `y` dominates `x`: componentwise `≥` with some strict gap.
pub fn dominates(y: &[f64], x: &[f64]) -> bool {
    y.iter().zip(x).all(|(a, b)| a >= b) && y.iter().zip(x).any(|(a, b)| a > b)
}

/// Every prefix sum of the ascending `y` is at least that of `x` (equal
/// totals assumed): `y` is at least as even as `x`.
pub fn more_even(y: &[f64], x: &[f64]) -> bool {
    let mut ys = y.to_vec();
    let mut xs = x.to_vec();
    ys.sort_by(f64::total_cmp);
    xs.sort_by(f64::total_cmp);
    let (mut sy, mut sx) = (0.0, 0.0);
    ys.iter().zip(&xs).all(|(a, b)| {
        sy += a;
        sx += b;
        sy >= sx - 1e-12 * sx.abs().max(1.0)
    })
}
