use minilp::{ComparisonOp, OptimizationDirection, Problem};

pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// `max cᵀy` subject to `Ay ≤ b` and `y ≥ lower`.
pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64], lower: &[f64]) -> LpOutcome {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = c
        .iter()
        .zip(lower)
        .map(|(&cj, &lo)| problem.add_var(cj, (lo, f64::INFINITY)))
        .collect();
    for (row, &rhs) in a.iter().zip(b) {
        let expr: Vec<_> = vars
            .iter()
            .zip(row)
            .filter(|(_, &coef)| coef != 0.0)
            .map(|(&v, &coef)| (v, coef))
            .collect();
        problem.add_constraint(expr, ComparisonOp::Le, rhs);
    }
    match problem.solve() {
        Ok(sol) => LpOutcome::Optimal {
            x: vars.iter().map(|&v| *sol.var_value(v)).collect(),
            value: sol.objective(),
        },
        Err(minilp::Error::Infeasible) => LpOutcome::Infeasible,
        Err(minilp::Error::Unbounded) => LpOutcome::Unbounded,
    }
}
