//! Euclidean projection onto `{x : Ax ≤ b, x ≥ floor}` by Hildreth's dual
//! coordinate ascent.

const MAX_SWEEPS: usize = 200_000;

/// Projects `z` onto the polyhedron. `scale` sets the absolute feasibility
/// tolerance (`1e-13 · scale`).
pub(crate) fn project(z: &[f64], a: &[Vec<f64>], b: &[f64], floor: f64, scale: f64) -> Vec<f64> {
    let n = z.len();
    let tol = 1e-13 * scale.max(1.0);
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| v >= floor) && a.iter().zip(b).all(|(row, &bi)| dot(row, x) <= bi + tol)
    };
    if feasible(z) {
        return z.to_vec();
    }
    let norms: Vec<f64> = a.iter().map(|row| dot(row, row)).collect();
    let mut x = z.to_vec();
    let mut mu_rows = vec![0.0; a.len()];
    let mut mu_floor = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        let mut moved = 0.0f64;
        for (i, row) in a.iter().enumerate() {
            if norms[i] == 0.0 {
                continue;
            }
            let next = (mu_rows[i] + (dot(row, &x) - b[i]) / norms[i]).max(0.0);
            let step = next - mu_rows[i];
            if step != 0.0 {
                for (xj, rj) in x.iter_mut().zip(row) {
                    *xj -= step * rj;
                }
                mu_rows[i] = next;
                moved = moved.max(step.abs() * norms[i].sqrt());
            }
        }
        for j in 0..n {
            // Constraint −x_j ≤ −floor.
            let next = (mu_floor[j] + (floor - x[j])).max(0.0);
            let step = next - mu_floor[j];
            if step != 0.0 {
                x[j] += step;
                mu_floor[j] = next;
                moved = moved.max(step.abs());
            }
        }
        if moved <= tol && feasible(&x) {
            break;
        }
    }
    x
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projects_onto_halfspace() {
        let a = vec![vec![1.0, 1.0]];
        let p = project(&[2.0, 2.0], &a, &[2.0], 0.0, 1.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn respects_floor_and_corner() {
        let a = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        let p = project(&[-1.0, 3.0], &a, &[2.0, 0.5], 1e-9, 1.0);
        assert!((p[0] - 1e-9).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn feasible_points_unchanged() {
        let a = vec![vec![1.0, 1.0]];
        assert_eq!(project(&[0.5, 0.25], &a, &[2.0], 0.0, 1.0), vec![0.5, 0.25]);
    }
}
