//! Seeded random allocations for the verification suites.
//!
//! Every trial gets its own generator seeded with `seed + trial`, so suites
//! can run trials in any order (or in parallel) and still reproduce.

use rand::distributions::Open01;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocation::Allocation;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial))
}

/// A point drawn uniformly from the open simplex (Dirichlet(1, …, 1)).
pub fn simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.sample::<f64, _>(Open01).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Strictly positive allocation of length `n` with total `10^U(-3, 3)`.
pub fn positive_allocation<R: Rng>(rng: &mut R, n: usize) -> Allocation {
    let total = 10f64.powf(rng.gen_range(-3.0..3.0));
    let v = simplex_point(rng, n)
        .into_iter()
        .map(|p| (p * total).max(f64::MIN_POSITIVE))
        .collect();
    Allocation::new(v).expect("simplex sample is a valid allocation")
}

/// Like [`positive_allocation`] with each entry zeroed with probability
/// `zero_prob`, keeping at least one positive entry.
pub fn allocation_with_zeros<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> Allocation {
    let mut v = positive_allocation(rng, n).into_inner();
    let keep = rng.gen_range(0..n);
    for (i, e) in v.iter_mut().enumerate() {
        if i != keep && rng.gen_bool(zero_prob) {
            *e = 0.0;
        }
    }
    Allocation::new(v).expect("one entry kept positive")
}

/// Strictly positive allocation with `max / min ≤ spread`.
pub fn bounded_spread_allocation<R: Rng>(rng: &mut R, n: usize, spread: f64) -> Allocation {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    let v = (0..n)
        .map(|_| scale * rng.gen_range(1.0..=spread))
        .collect();
    Allocation::new(v).expect("positive entries")
}

/// Strictly positive allocation that is not a multiple of `1_n` (`n ≥ 2`).
pub fn unequal_allocation<R: Rng>(rng: &mut R, n: usize) -> Allocation {
    loop {
        let x = positive_allocation(rng, n);
        if !x.positive_entries_equal() {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_per_trial() {
        let a = positive_allocation(&mut trial_rng(7, 3), 5);
        let b = positive_allocation(&mut trial_rng(7, 3), 5);
        assert_eq!(a, b);
        assert_ne!(a, positive_allocation(&mut trial_rng(7, 4), 5));
    }

    #[test]
    fn spread_is_bounded() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..200 {
            let x = bounded_spread_allocation(&mut rng, 6, 10.0);
            assert!(x.max() / x.min() <= 10.0 + 1e-12);
        }
    }

    #[test]
    fn zeros_keep_one_positive() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..200 {
            let x = allocation_with_zeros(&mut rng, 4, 0.9);
            assert!(x.positive_count() >= 1);
        }
    }
}
