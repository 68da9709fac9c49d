use serde::{Deserialize, Serialize};

use super::lp::{maximize, LpOutcome};
use super::projection::dot;
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RegionJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

/// Polytope `{x ≥ 0 : Ax ≤ b}`, checked non-empty and bounded on
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleRegion {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
    #[serde(skip)]
    upper: Vec<f64>,
}

impl FeasibleRegion {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let n = a.first().map_or(0, Vec::len);
        if a.is_empty() || n == 0 {
            return Err(Error::InvalidRegion(
                "A needs at least one row and one column".into(),
            ));
        }
        if let Some(i) = a.iter().position(|row| row.len() != n) {
            return Err(Error::InvalidRegion(format!(
                "row {} of A has {} entries, expected {n}",
                i + 1,
                a[i].len()
            )));
        }
        if b.len() != a.len() {
            return Err(Error::InvalidRegion(format!(
                "b has {} entries but A has {} rows",
                b.len(),
                a.len()
            )));
        }
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidRegion("A and b must be finite".into()));
        }
        if let Some(names) = &names {
            if names.len() != n {
                return Err(Error::InvalidRegion(format!(
                    "{} names for {n} coordinates",
                    names.len()
                )));
            }
        }
        let upper = bounding_box(&a, &b)?;
        Ok(FeasibleRegion { a, b, names, upper })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RegionJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        FeasibleRegion::new(raw.a, raw.b, raw.names)
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Per-coordinate maxima over the region (the minima are 0).
    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    /// Diameter of the bounding box `[0, upper]`.
    pub fn diameter(&self) -> f64 {
        dot(&self.upper, &self.upper).sqrt()
    }

    /// Largest constraint violation of `x` (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, &bi)| dot(row, x) - bi);
        let signs = x.iter().map(|&v| -v);
        rows.chain(signs).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.violation(x) <= tol
    }
}

fn bounding_box(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a[0].len();
    let zeros = vec![0.0; n];
    let mut upper = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = vec![0.0; n];
        c[j] = 1.0;
        match maximize(&c, a, b, &zeros) {
            LpOutcome::Optimal { value, .. } => upper.push(value.max(0.0)),
            LpOutcome::Infeasible => return Err(Error::EmptyRegion),
            LpOutcome::Unbounded => return Err(Error::UnboundedRegion(j)),
        }
    }
    if upper.iter().all(|&u| u == 0.0) {
        return Err(Error::InvalidRegion(
            "region contains only the zero allocation".into(),
        ));
    }
    Ok(upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_region() {
        let r = FeasibleRegion::new(vec![vec![1.0, 1.0]], vec![2.0], None).unwrap();
        assert_eq!(r.upper_bounds(), &[2.0, 2.0]);
        assert!(r.contains(&[1.0, 1.0], 0.0));
        assert!(!r.contains(&[1.5, 1.0], 1e-9));
    }

    #[test]
    fn rejects_bad_regions() {
        assert!(matches!(
            FeasibleRegion::new(vec![vec![1.0, 0.0]], vec![1.0], None),
            Err(Error::UnboundedRegion(1))
        ));
        assert!(matches!(
            FeasibleRegion::new(vec![vec![1.0, 1.0]], vec![-1.0], None),
            Err(Error::EmptyRegion)
        ));
        assert!(matches!(
            FeasibleRegion::new(vec![vec![1.0, 1.0], vec![1.0]], vec![1.0, 1.0], None),
            Err(Error::InvalidRegion(_))
        ));
        assert!(matches!(
            FeasibleRegion::new(vec![vec![1.0, 1.0]], vec![0.0], None),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let r =
            FeasibleRegion::from_json(r#"{"A": [[1, 2]], "b": [2], "names": ["u", "v"]}"#).unwrap();
        assert_eq!(r.upper_bounds(), &[2.0, 1.0]);
        assert_eq!(r.names().unwrap(), &["u".to_string(), "v".to_string()]);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"A":[[1.0,2.0]],"b":[2.0],"names":["u","v"]}"#);
        assert!(matches!(
            FeasibleRegion::from_json(r#"{"A": [[1, 2]]"#),
            Err(Error::Parse { .. })
        ));
    }
}
