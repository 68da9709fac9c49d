//! Numeric grids given as `start:step:stop` or comma lists.

use crate::error::{Error, Result};

/// Points closer than this fraction of the step to 0 or 1 are snapped.
const SNAP: f64 = 1e-9;

fn grid_error(text: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("grid \"{text}\""),
        message: message.into(),
    }
}

fn number(text: &str, part: &str) -> Result<f64> {
    let v: f64 = part
        .trim()
        .parse()
        .map_err(|_| grid_error(text, format!("`{}` is not a number", part.trim())))?;
    if !v.is_finite() {
        return Err(grid_error(text, format!("`{}` is not finite", part.trim())));
    }
    Ok(v)
}

/// Digits after the decimal point in a plain decimal literal, `None` for
/// exponent notation.
fn decimals(part: &str) -> Option<i32> {
    let part = part.trim();
    if part.contains(['e', 'E']) {
        return None;
    }
    Some(
        part.split_once('.')
            .map_or(0, |(_, frac)| frac.len() as i32),
    )
}

/// Parses a grid. Ranges include `stop` when it lies on the lattice and are
/// rounded to the decimal precision of `start` and `step`, so `0:0.1:1`
/// yields `0.3` rather than `0.30000000000000004`. Values within a hair of
/// 0 or 1 are snapped to them exactly.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (
                number(text, start)?,
                number(text, step)?,
                number(text, stop)?,
            );
            if !(h > 0.0) {
                return Err(grid_error(text, "step must be positive"));
            }
            if b < a {
                return Err(grid_error(text, "stop is below start"));
            }
            let span = (b - a) / h;
            if span > 1e6 {
                return Err(grid_error(text, "more than a million points"));
            }
            let mut count = span.floor() as usize;
            if span - count as f64 > 1.0 - SNAP {
                count += 1;
            }
            let scale = decimals(start)
                .zip(decimals(step))
                .map(|(p, q)| 10f64.powi(p.max(q)));
            let values = (0..=count)
                .map(|k| {
                    let v = a + h * k as f64;
                    let v = scale.map_or(v, |s| (v * s).round() / s);
                    snap(v, h)
                })
                .collect();
            Ok(values)
        }
        [_] => text.split(',').map(|p| number(text, p)).collect(),
        _ => Err(grid_error(text, "expected start:step:stop or a comma list")),
    }
}

fn snap(v: f64, step: f64) -> f64 {
    let eps = SNAP * step;
    if v.abs() < eps {
        0.0
    } else if (v - 1.0).abs() < eps {
        1.0
    } else {
        v
    }
}
