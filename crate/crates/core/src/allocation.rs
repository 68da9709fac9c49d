//! Validated non-negative resource vectors.

use serde::Serialize;

use crate::error::{Error, Result};

/// A resource allocation `x ∈ R^n_+` with at least one positive entry.
///
/// Entry `i` is the amount of resource given to user `i`. Every fairness
/// measure in this crate takes an `Allocation`, so validation happens once
/// at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyAllocation);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::AllZero);
        }
        Ok(Allocation(values))
    }

    /// The equal allocation `1_n`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total resource `w(x) = Σ x_i`, summed in ascending order so the
    /// result does not depend on the order of the entries.
    pub fn total(&self) -> f64 {
        self.ascending().iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_positive(&self) -> f64 {
        self.0
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|&&v| v == 0.0).count()
    }

    pub fn positive_count(&self) -> usize {
        self.len() - self.zero_count()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    /// Errors with the first zero index when some entry is zero.
    pub fn require_strictly_positive(&self) -> Result<()> {
        match self.0.iter().position(|&v| v == 0.0) {
            Some(index) => Err(Error::ZeroEntry { index }),
            None => Ok(()),
        }
    }

    /// True when every positive entry has the same value.
    pub fn positive_entries_equal(&self) -> bool {
        let mut positives = self.0.iter().filter(|&&v| v > 0.0);
        match positives.next() {
            Some(&first) => positives.all(|&v| v == first),
            None => false,
        }
    }

    /// Normalized shares `x / w(x)`.
    pub fn shares(&self) -> Vec<f64> {
        let w = self.total();
        self.0.iter().map(|&v| v / w).collect()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(crate::error::domain(
                "t",
                t,
                "scale factor must be positive",
            ));
        }
        Self::new(self.0.iter().map(|&v| v * t).collect())
    }

    /// Appends `k` users with zero resource.
    pub fn with_zeros(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(0.0, k));
        Allocation(v)
    }

    /// Entries sorted ascending (`x↑`).
    pub fn ascending(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl TryFrom<Vec<f64>> for Allocation {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Allocation::new(values)
    }
}

impl TryFrom<&[f64]> for Allocation {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Allocation::new(values.to_vec())
    }
}

impl AsRef<[f64]> for Allocation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Serde helpers for extended reals: non-finite values become the strings
/// `"-inf"`, `"inf"` or `"nan"` so JSON stays portable.
pub mod extended_real {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else if value.is_nan() {
            s.serialize_str("nan")
        } else if *value > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn serialize_vec<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&Wrapped(*v))?;
        }
        seq.end()
    }

    pub fn serialize_opt<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => serialize(v, s),
            None => s.serialize_none(),
        }
    }

    /// Newtype that serializes through [`serialize`].
    #[derive(Debug, Clone, Copy)]
    pub struct Wrapped(pub f64);

    impl serde::Serialize for Wrapped {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }
}
