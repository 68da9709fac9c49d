mod common;

use proptest::prelude::*;
use proptest::sample::select;

use fairmetric::alpha::{
    alpha_utility_gradient, factorize, pareto_counterexample, pareto_lambda_max, reward_ratio,
    tradeoff_objective,
};
use fairmetric::axioms::{
    direct_product, fairness_log_generator, fairness_recursive, GeneratorSpec, Partition,
};
use fairmetric::bounds::{
    beta_monotonicity_sweep, box_lower_bound, starvation_bounds, threshold_resource, BoxConstraint,
    StarvationBounds,
};
use fairmetric::majorization::{majorizes, robin_hood};
use fairmetric::measures::{
    fairness_general, fairness_ratio_limits, fairness_unified, jain_generalized, RatioLimit,
};
use fairmetric::suites::linear_grid;
use fairmetric::tradeoff::{
    dominance_search, maximize_phi, tradeoff_curve, FeasibleRegion, SolverOptions,
};
use fairmetric::Allocation;

use common::*;

fn entry() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_map(|e| 10f64.powf(e))
}

fn positive(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(entry(), 2..=max_len)
}

/// Entries zeroed with probability about 0.3, at least one kept.
fn with_zeros() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((entry(), prop::bool::weighted(0.3)), 2..=8).prop_map(|v| {
        let mut out: Vec<f64> = v.iter().map(|&(x, z)| if z { 0.0 } else { x }).collect();
        out[0] = v[0].0;
        out
    })
}

fn regular_beta() -> impl Strategy<Value = f64> {
    prop_oneof![-6.0..-0.01f64, 0.01..0.99f64, 1.01..6.0f64]
}

fn beta_below_one() -> impl Strategy<Value = f64> {
    prop_oneof![-6.0..-0.01f64, 0.01..0.99f64]
}

fn tradeoff_beta() -> impl Strategy<Value = f64> {
    prop_oneof![0.05..0.95f64, 1.05..5.0f64]
}

fn alloc(v: &[f64]) -> Allocation {
    Allocation::new(v.to_vec()).unwrap()
}

fn f(v: &[f64], beta: f64) -> f64 {
    fairness_unified(&alloc(v), beta).unwrap().value
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn permutation_symmetry(v in positive(8), beta in regular_beta(), seed in any::<u64>()) {
        let mut p = v.clone();
        let n = p.len();
        for i in (1..n).rev() {
            p.swap(i, (seed as usize).wrapping_add(i * 7919) % (i + 1));
        }
        prop_assert_eq!(f(&v, beta), f(&p, beta));
    }

    #[test]
    fn scale_invariance(v in positive(8), beta in regular_beta(), t in select(vec![1e-6, 1.0, 1e6])) {
        let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
        prop_assert!(close(f(&scaled, beta), f(&v, beta), 1e-12));
    }

    #[test]
    fn equal_allocation_is_maximal(v in with_zeros(), beta in regular_beta()) {
        let n = v.len();
        let w = sum(&v);
        let x: Vec<f64> = v.iter().map(|e| e * n as f64 / w).collect();
        let equal = f(&vec![1.0; n], beta);
        prop_assert!(close(equal.abs(), n as f64, 1e-12));
        prop_assert!(f(&x, beta) <= equal + 1e-12 * equal.abs());
    }

    #[test]
    fn jain_range(v in with_zeros(), beta in beta_below_one()) {
        let n = v.len() as f64;
        let j = jain_generalized(&alloc(&v), beta).unwrap();
        prop_assert!(j >= 1.0 / n - 1e-12 && j <= 1.0 + 1e-12, "J = {}", j);
    }

    #[test]
    fn limit_consistency(v in prop::collection::vec(1.0..=10.0f64, 2..=8)) {
        let x = alloc(&v);
        let plus = fairness_ratio_limits(&x, RatioLimit::PlusInf).unwrap().value;
        let minus = fairness_ratio_limits(&x, RatioLimit::MinusInf).unwrap().value;
        prop_assert!(rel_err(f(&v, 50.0), plus) <= 0.02, "f_50 = {}, limit {}", f(&v, 50.0), plus);
        prop_assert!(rel_err(f(&v, -50.0), minus) <= 0.02, "f_-50 = {}, limit {}", f(&v, -50.0), minus);
    }

    #[test]
    fn reduction_identity(v in positive(8), beta in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64], r in 0.2..2.0f64) {
        prop_assume!((beta * r - 1.0).abs() > 1e-3);
        let x = alloc(&v);
        let general = fairness_general(&x, beta, r).unwrap().value;
        let reduced = fairness_general(&x, beta * r, 1.0).unwrap().value;
        // The sign is sign(1 − βr) on both sides; the identity is on magnitudes.
        prop_assert_eq!(general.signum(), reduced.signum());
        prop_assert!(close(general.abs(), reduced.abs().powf(r), 1e-10));
    }

    #[test]
    fn monotone_in_beta(v in with_zeros(), a in regular_beta(), b in regular_beta()) {
        prop_assume!((a < 1.0) == (b < 1.0) && a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (f_lo, f_hi) = (f(&v, lo), f(&v, hi));
        let slack = 1e-12 * f_lo.abs().max(1.0);
        if lo < 1.0 {
            prop_assert!(f_lo <= f_hi + slack);
        } else {
            prop_assert!(f_lo >= f_hi - slack || f_hi == f64::NEG_INFINITY);
        }
    }

    #[test]
    fn partition_irrelevance(v in positive(8), beta in regular_beta(), cut in any::<prop::sample::Index>()) {
        let at = 1 + cut.index(v.len() - 1);
        let p = Partition::split(&alloc(&v), at).unwrap();
        let recursive = fairness_recursive(&p, GeneratorSpec::power(beta).unwrap(), beta).unwrap().value;
        prop_assert!(close(recursive, naive_f(&v, beta), 1e-9));
    }

    #[test]
    fn saturation(n in 1usize..200, beta in regular_beta(), r in 0.25..1.75f64) {
        prop_assume!((beta * r - 1.0).abs() > 1e-3);
        let a = fairness_general(&Allocation::ones(n).unwrap(), beta, r).unwrap().value;
        let b = fairness_general(&Allocation::ones(n + 1).unwrap(), beta, r).unwrap().value;
        prop_assert!((b / a - 1.0).abs() < 2.0 / n as f64);
    }

    #[test]
    fn direct_product_identity(y in positive(6), z in positive(6), beta in regular_beta()) {
        let product = f(direct_product(&alloc(&y), &alloc(&z)).values(), beta);
        let sign = if beta < 1.0 { 1.0 } else { -1.0 };
        prop_assert!(close(product, sign * naive_f(&y, beta).abs() * naive_f(&z, beta).abs(), 1e-10));
    }

    #[test]
    fn log_generator_is_the_power_limit(v in prop::collection::vec(1.0..=10.0f64, 2..=8), r in 0.25..=1.0f64) {
        let x = alloc(&v);
        let log = fairness_log_generator(&x, r).unwrap();
        let power = fairness_general(&x, 1e-6, r).unwrap().value;
        prop_assert!(close(log, power, 1e-6), "log {} power {}", log, power);
    }

    /// `ln(f_{β,r}/e^{rH}) = β·r²·Var_p(ln p)/2 + O(β²)` on wide spreads.
    #[test]
    fn log_generator_gap_is_first_order(v in positive(8), r in 0.25..2.0f64) {
        let x = alloc(&v);
        let beta = 1e-6;
        let log = fairness_log_generator(&x, r).unwrap();
        let power = fairness_general(&x, beta, r).unwrap().value;
        let w = sum(&v);
        let mean: f64 = v.iter().map(|e| e / w * (e / w).ln()).sum();
        let var: f64 = v.iter().map(|e| e / w * ((e / w).ln() - mean).powi(2)).sum();
        let predicted = beta * r * r * var / 2.0;
        prop_assert!(((power / log).ln() - predicted).abs() <= 1e-8, "gap {} predicted {}", (power / log).ln(), predicted);
    }

    #[test]
    fn robin_hood_never_lowers_fairness(
        v in positive(8),
        beta in select(vec![-4.0, -2.5, -1.0, -0.5, 0.5, 2.0, 3.0]),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        share in 0.01..0.99f64,
    ) {
        let (i, j) = (i.index(v.len()), j.index(v.len()));
        prop_assume!(v[i] > v[j]);
        let x = alloc(&v);
        let after = robin_hood(&x, i, j, share * (v[i] - v[j])).unwrap();
        let (before, now) = (f(&v, beta), f(after.values(), beta));
        prop_assert!(now >= before - 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn majorization_is_transitive(
        v in positive(8),
        picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.05..0.5f64), 2),
    ) {
        let mut chain = vec![alloc(&v)];
        for (a, b, share) in picks {
            let cur = chain.last().unwrap().clone();
            let (a, b) = (a.index(cur.len()), b.index(cur.len()));
            let vals = cur.values();
            let (rich, poor) = if vals[a] >= vals[b] { (a, b) } else { (b, a) };
            prop_assume!(vals[rich] > vals[poor]);
            chain.push(robin_hood(&cur, rich, poor, share * (vals[rich] - vals[poor])).unwrap());
        }
        let tol = 1e-9 * sum(&v);
        prop_assert!(majorizes(&chain[1], &chain[0], tol).unwrap().holds());
        prop_assert!(majorizes(&chain[2], &chain[1], tol).unwrap().holds());
        prop_assert!(majorizes(&chain[2], &chain[0], tol).unwrap().holds());
    }

    #[test]
    fn equal_allocation_is_the_unique_maximizer(v in positive(8), beta in regular_beta()) {
        let max = v.iter().copied().fold(0.0, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assume!(max / min > 1.01);
        let equal = vec![sum(&v) / v.len() as f64; v.len()];
        prop_assert!(f(&v, beta) < f(&equal, beta));
    }

    #[test]
    fn factorization_identity(v in positive(8), beta in prop_oneof![0.01..0.99f64, 1.01..=5.0f64]) {
        let (fair, eff) = factorize(&alloc(&v), beta).unwrap();
        let u = utility_sum(&v, beta);
        prop_assert!((fair * eff - u).abs() <= 1e-9 * u.abs().max(1.0));
    }

    #[test]
    fn pareto_preserved_up_to_threshold(
        v in positive(8),
        beta in tradeoff_beta(),
        frac in 0.0..=1.0f64,
        bumps in prop::collection::vec(0.0..1.0f64, 8),
        forced in any::<prop::sample::Index>(),
    ) {
        let lambda = frac * pareto_lambda_max(beta).unwrap();
        let k = forced.index(v.len());
        let y: Vec<f64> = v
            .iter()
            .zip(&bumps)
            .enumerate()
            .map(|(i, (x, b))| x * (1.0 + if i == k { 0.01 + b } else { *b }))
            .collect();
        let gain = tradeoff_objective(&alloc(&y), beta, lambda).unwrap()
            - tradeoff_objective(&alloc(&v), beta, lambda).unwrap();
        prop_assert!(gain > 0.0);
    }

    #[test]
    fn pareto_violated_above_threshold(beta in tradeoff_beta(), over in 1.05..4.0f64, n in 2usize..=8) {
        let lambda = over * pareto_lambda_max(beta).unwrap();
        let size = if beta > 1.0 { n } else { 4096 };
        if let Ok(c) = pareto_counterexample(beta, lambda, size) {
            prop_assert!(dominates(c.x_prime.values(), c.x.values()));
            prop_assert!(naive_phi(c.x_prime.values(), beta, lambda) < naive_phi(c.x.values(), beta, lambda));
        } else {
            prop_assert!(beta < 1.0, "construction must succeed for beta > 1");
        }
    }

    #[test]
    fn utility_gradient_matches_differences(v in positive(8), alpha in 0.0..4.0f64) {
        let g = alpha_utility_gradient(&alloc(&v), alpha).unwrap();
        let fd = fd_gradient(|y| utility_sum(y, alpha), &v, 1e-5);
        prop_assert!(max_rel_gap(&g, &fd) <= 1e-6);
    }

    #[test]
    fn reward_ratio_is_monotone(v in positive(8)) {
        let x = alloc(&v);
        prop_assume!(!x.positive_entries_equal());
        let ratios: Vec<f64> = linear_grid(0.0, 8.0, 50)
            .iter()
            .map(|&a| reward_ratio(&x, a).unwrap().ratio)
            .collect();
        for w in ratios.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        let eta = reward_ratio(&x, 1.0).unwrap().eta;
        prop_assert!(sum(&eta).abs() < 1e-12);
    }

    #[test]
    fn starvation_bounds_hold(v in with_zeros(), beta in beta_below_one()) {
        let x = alloc(&v);
        match starvation_bounds(&x, beta).unwrap() {
            StarvationBounds::Bounded { max_zero_users, min_max_resource, zero_users, max_resource, .. } => {
                prop_assert!(zero_users as f64 <= max_zero_users + 1e-9);
                prop_assert!(max_resource >= min_max_resource * (1.0 - 1e-12));
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn threshold_sign_test(v in positive(8), beta in select(vec![-2.0, -1.0, -0.5, 0.5, 2.0, 3.0])) {
        let x = alloc(&v);
        let threshold = threshold_resource(&x, beta).unwrap();
        let fd = fd_gradient(|y| naive_f(y, beta), &v, 1e-5);
        let scale = fd.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for (d, xi) in fd.iter().zip(&v) {
            if d.abs() > 1e-6 * scale {
                prop_assert_eq!(d.signum(), (threshold - xi).signum());
            }
        }
    }

    #[test]
    fn box_bound_below_brute_force(gamma in 1.1..6.0f64, beta in regular_beta(), n in 1usize..=10) {
        let b = box_lower_bound(BoxConstraint::new(1.0, gamma).unwrap(), beta, n).unwrap();
        let brute = box_brute_force(1.0, gamma, beta, n);
        let relaxed = box_mu_grid_min(gamma, beta, n);
        let tol = 1e-9 * brute.abs().max(1.0);
        prop_assert!(b.bound <= brute + tol);
        prop_assert!(brute - b.bound <= relaxed - b.bound + tol);
    }

    #[test]
    fn sweep_is_monotone(v in with_zeros()) {
        let grid = linear_grid(-8.0, 5.0, 53);
        prop_assert!(beta_monotonicity_sweep(&alloc(&v), &grid).unwrap().passed);
    }
}

/// Bounded region `{x ≥ 0 : Ax ≤ b}` with strictly positive `A`.
fn region(dim: usize) -> impl Strategy<Value = FeasibleRegion> {
    (1usize..=3)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec(prop::collection::vec(0.2..3.0f64, dim), m),
                prop::collection::vec(0.5..3.0f64, m),
            )
        })
        .prop_map(|(a, b)| FeasibleRegion::new(a, b, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_output_is_pareto_optimal_below_threshold(
        r in (2usize..=3).prop_flat_map(region),
        beta in tradeoff_beta(),
        frac in 0.0..=1.0f64,
    ) {
        let lambda = frac * pareto_lambda_max(beta).unwrap();
        let p = maximize_phi(&r, beta, lambda, &SolverOptions::default()).unwrap();
        prop_assert!(dominance_search(&r, &p.allocation, 1e-6).unwrap().is_none(), "{:?}", p);
    }

    #[test]
    fn curve_trades_throughput_for_fairness(r in region(2), beta in tradeoff_beta()) {
        let lambda_max = pareto_lambda_max(beta).unwrap();
        let grid: Vec<f64> = (0..=6).map(|k| lambda_max * k as f64 / 6.0).collect();
        let points = tradeoff_curve(&r, beta, &grid, &SolverOptions::default()).unwrap();
        for w in points.windows(2) {
            let slack = 1e-6;
            prop_assert!(w[1].fairness >= w[0].fairness - slack * w[0].fairness.abs(), "{:?}", points);
            prop_assert!(w[1].throughput <= w[0].throughput * (1.0 + slack), "{:?}", points);
        }
    }
}

/// Two-user region rescaled so its larger axis intercept lies in `[2, 3]`,
/// keeping a fixed-pitch lattice fine relative to the allocations.
fn unit_region() -> impl Strategy<Value = FeasibleRegion> {
    (
        prop::collection::vec(prop::collection::vec(0.5..2.0f64, 2), 1..=3),
        prop::collection::vec(1.0..2.0f64, 3),
        2.0..3.0f64,
    )
        .prop_map(|(a, b, reach)| {
            let b = b[..a.len()].to_vec();
            let probe = FeasibleRegion::new(a.clone(), b.clone(), None).unwrap();
            let u = probe.upper_bounds();
            let s = reach / u[0].max(u[1]);
            FeasibleRegion::new(a, b.iter().map(|v| v * s).collect(), None).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn solver_matches_grid_oracle(r in unit_region(), beta in tradeoff_beta(), frac in 0.0..=2.0f64) {
        let lambda = frac * pareto_lambda_max(beta).unwrap();
        let p = maximize_phi(&r, beta, lambda, &SolverOptions::default()).unwrap();
        let u = r.upper_bounds();
        let oracle = GridOracle::new(r.a(), r.b(), [u[0], u[1]], beta, 1e-3);
        let (_, best) = oracle.best(lambda);
        let got = naive_phi(p.allocation.values(), beta, lambda);
        prop_assert!((got - best).abs() <= 1e-3, "solver {} grid {}", got, best);
    }
}
