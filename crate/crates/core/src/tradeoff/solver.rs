use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::lp::{maximize, LpOutcome};
use super::projection::{dot, project};
use super::region::FeasibleRegion;
use crate::allocation::{extended_real, Allocation};
use crate::alpha::{pareto_flag, tradeoff_gradient, tradeoff_objective, ParetoFlag};
use crate::error::{Error, Result};
use crate::measures::fairness_unified;
use crate::sampling::{simplex_point, trial_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub starts: usize,
    pub max_iter: usize,
    /// Stop once an accepted step improves `Φ` by less than this (relative).
    pub rel_tol: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            starts: 16,
            max_iter: 10_000,
            rel_tol: 1e-10,
            armijo: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub allocation: Allocation,
    #[serde(serialize_with = "extended_real::serialize")]
    pub fairness: f64,
    pub throughput: f64,
    #[serde(serialize_with = "extended_real::serialize")]
    pub phi: f64,
    pub pareto_flag: ParetoFlag,
}

impl TradeoffPoint {
    fn at(x: Allocation, beta: f64, lambda: f64) -> Result<Self> {
        Ok(TradeoffPoint {
            lambda,
            fairness: fairness_unified(&x, beta)?.value,
            throughput: x.total(),
            phi: tradeoff_objective(&x, beta, lambda)?,
            pareto_flag: pareto_flag(beta, lambda)?,
            allocation: x,
        })
    }
}

struct Problem<'a> {
    region: &'a FeasibleRegion,
    beta: f64,
    lambda: f64,
    floor: f64,
    scale: f64,
}

impl Problem<'_> {
    fn phi(&self, x: &[f64]) -> f64 {
        Allocation::new(x.to_vec())
            .and_then(|a| tradeoff_objective(&a, self.beta, self.lambda))
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn project(&self, z: &[f64]) -> Vec<f64> {
        project(z, self.region.a(), self.region.b(), self.floor, self.scale)
    }

    /// Projected gradient ascent with backtracking from a unit step in
    /// coordinates normalized by the bounding-box diameter. The trial step
    /// is also capped at one diameter: near the floor the gradient is huge,
    /// and far trial points make the projection's dual variables (and their
    /// rounding) equally huge.
    fn ascend(&self, start: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, f64)> {
        let mut x = self.project(start);
        let mut phi = self.phi(&x);
        let unit = self.scale * self.scale;
        for _ in 0..opts.max_iter {
            let g = tradeoff_gradient(&Allocation::new(x.clone())?, self.beta, self.lambda)?;
            let g_norm = dot(&g, &g).sqrt();
            let mut t = unit.min(self.scale / g_norm);
            let accepted = loop {
                let moved: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + t * gi).collect();
                let cand = self.project(&moved);
                let step: Vec<f64> = cand.iter().zip(&x).map(|(c, xi)| c - xi).collect();
                let phi_c = self.phi(&cand);
                if phi_c.is_finite() && phi_c >= phi + opts.armijo * dot(&g, &step) {
                    break Some((cand, phi_c));
                }
                t *= 0.5;
                if t < 1e-30 * unit {
                    break None;
                }
            };
            let Some((cand, phi_c)) = accepted else {
                break;
            };
            let gain = (phi_c - phi) / phi.abs().max(1.0);
            x = cand;
            phi = phi_c;
            if gain < opts.rel_tol {
                break;
            }
        }
        Ok((x, phi))
    }

    /// LP vertices along several objective directions plus random convex
    /// combinations of them.
    fn starts(&self, opts: &SolverOptions) -> Vec<Vec<f64>> {
        let n = self.region.dim();
        let mut rng = trial_rng(opts.seed, 0);
        let vertex_target = opts.starts.div_ceil(2).max(1);
        let mut directions = vec![vec![1.0; n]];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            directions.push(e);
        }
        while directions.len() < vertex_target {
            directions.push(simplex_point(&mut rng, n));
        }
        directions.truncate(vertex_target);
        let zeros = vec![0.0; n];
        let vertices: Vec<Vec<f64>> = directions
            .iter()
            .filter_map(
                |c| match maximize(c, self.region.a(), self.region.b(), &zeros) {
                    LpOutcome::Optimal { x, .. } => Some(x),
                    _ => None,
                },
            )
            .collect();
        let mut starts = vertices.clone();
        while starts.len() < opts.starts.max(1) && !vertices.is_empty() {
            let weights = simplex_point(&mut rng, vertices.len());
            let mut p = vec![0.0; n];
            for (v, wgt) in vertices.iter().zip(&weights) {
                for (pj, vj) in p.iter_mut().zip(v) {
                    *pj += wgt * vj;
                }
            }
            // Pull slightly toward the box center to get off the boundary.
            let shrink = rng.gen_range(0.5..1.0);
            for (pj, uj) in p.iter_mut().zip(self.region.upper_bounds()) {
                *pj = shrink * *pj + (1.0 - shrink) * 0.5 * uj * 1e-3;
            }
            starts.push(p);
        }
        starts
    }
}

/// Maximizes `Φ_λ` over the region by multi-start projected gradient
/// ascent. Iterates stay above a positivity floor of `1e-9` times the
/// bounding-box diameter.
pub fn maximize_phi(
    region: &FeasibleRegion,
    beta: f64,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<TradeoffPoint> {
    pareto_flag(beta, lambda)?;
    let scale = region.diameter();
    let problem = Problem {
        region,
        beta,
        lambda,
        floor: 1e-9 * scale,
        scale,
    };
    let starts = problem.starts(opts);
    if starts.is_empty() {
        return Err(Error::Solver("no feasible starting point".into()));
    }
    let results = starts
        .par_iter()
        .map(|s| problem.ascend(s, opts))
        .collect::<Result<Vec<_>>>()?;
    let (best, _) = results
        .into_iter()
        .filter(|(_, phi)| phi.is_finite())
        .fold(None::<(Vec<f64>, f64)>, |acc, (x, phi)| match acc {
            Some((_, best)) if best >= phi => acc,
            _ => Some((x, phi)),
        })
        .ok_or_else(|| Error::Solver("every start ended at a non-finite objective".into()))?;
    TradeoffPoint::at(Allocation::new(best)?, beta, lambda)
}

/// One solved point per `λ`.
pub fn tradeoff_curve(
    region: &FeasibleRegion,
    beta: f64,
    lambda_grid: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<TradeoffPoint>> {
    lambda_grid
        .iter()
        .map(|&lambda| maximize_phi(region, beta, lambda, opts))
        .collect()
}

/// Default slack for [`dominance_search`] on solver output: `1e-6` times
/// the bounding-box diameter.
pub fn dominance_tolerance(region: &FeasibleRegion) -> f64 {
    1e-6 * region.diameter()
}

/// A feasible `y ≥ x` with `Σ(y − x) > tol`, if one exists.
///
/// Solved as `max Σy` over the region intersected with `{y ≥ x}`. The
/// right-hand side is relaxed by the (tiny) violation of `x` itself so that
/// points produced by floating-point projection stay admissible.
pub fn dominance_search(
    region: &FeasibleRegion,
    x: &Allocation,
    tol: f64,
) -> Result<Option<Allocation>> {
    if x.len() != region.dim() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: region.dim(),
        });
    }
    let violation = region.violation(x.values());
    if violation > 1e-9 * region.diameter().max(1.0) {
        return Err(Error::InfeasibleAllocation { violation });
    }
    let b: Vec<f64> = region.b().iter().map(|bi| bi + violation).collect();
    let ones = vec![1.0; x.len()];
    match maximize(&ones, region.a(), &b, x.values()) {
        LpOutcome::Optimal { x: y, value } => {
            if value - x.total() > tol {
                Ok(Some(Allocation::new(y)?))
            } else {
                Ok(None)
            }
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Solver("dominance LP unbounded".into())),
    }
}
