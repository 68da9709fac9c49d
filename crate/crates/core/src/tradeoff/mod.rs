//! Fairness/throughput tradeoff over polyhedral feasible regions.
//!
//! Maximizing `Φ_λ` for a sweep of `λ` traces the curve of
//! `(f_β(x), Σ x_i)` pairs; points with `λ` above `|β/(1−β)|` are flagged
//! because their maximizers may be Pareto dominated.

mod lp;
mod projection;
mod region;
mod solver;

pub use region::FeasibleRegion;
pub use solver::{
    dominance_search, dominance_tolerance, maximize_phi, tradeoff_curve, SolverOptions,
    TradeoffPoint,
};
