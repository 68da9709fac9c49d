//! Allocation files: CSV with an optional label column, or JSON
//! `{"vectors": {label: [...]}}`.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::Allocation;

pub type Labeled = (String, Allocation);

fn parse_error(location: String, message: impl Into<String>) -> Error {
    Error::Parse {
        location,
        message: message.into(),
    }
}

/// Reads labeled allocations, picking the format from the extension
/// (`.json`, anything else is CSV).
pub fn parse_allocations(path: &Path) -> Result<Vec<Labeled>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_json(&text)
    } else {
        parse_csv(&text)
    }
}

/// Rows are `label,v1,v2,...` or just `v1,v2,...`; unlabeled rows are named
/// `row<k>` by 1-based row number. Columns in error messages are 1-based
/// fields of the row, label included. A first row made only of names is
/// taken as a header and skipped.
pub fn parse_csv(text: &str) -> Result<Vec<Labeled>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out: Vec<Labeled> = Vec::new();
    let mut row = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(format!("line {line}"), e.to_string())
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first_numeric = record[0].parse::<f64>().is_ok();
        if row == 0 && out.is_empty() && record.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        row += 1;
        let (label, start) = if first_numeric {
            (format!("row{row}"), 0)
        } else {
            (record[0].to_string(), 1)
        };
        let fields: Vec<&str> = record.iter().skip(start).collect();
        let mut values = Vec::with_capacity(fields.len());
        for (k, field) in fields.iter().enumerate() {
            let column = start + k + 1;
            let location = || format!("row \"{label}\", column {column}");
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(location(), format!("`{field}` is not a number")))?;
            values.push(check_entry(v, location)?);
        }
        push(&mut out, label, values, || format!("row {row}"))?;
    }
    if out.is_empty() {
        return Err(parse_error("input".into(), "no allocation rows"));
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<Labeled>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        parse_error(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let vectors = doc
        .get("vectors")
        .and_then(Value::as_object)
        .ok_or_else(|| {
            parse_error(
                "top level".into(),
                "expected an object with a \"vectors\" map",
            )
        })?;
    let mut out: Vec<Labeled> = Vec::new();
    for (label, array) in vectors {
        let items = array.as_array().ok_or_else(|| {
            parse_error(
                format!("vector \"{label}\""),
                "expected an array of numbers",
            )
        })?;
        let mut values = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let location = || format!("vector \"{label}\", index {}", k + 1);
            let v = item
                .as_f64()
                .ok_or_else(|| parse_error(location(), format!("`{item}` is not a number")))?;
            values.push(check_entry(v, location)?);
        }
        push(&mut out, label.clone(), values, || {
            format!("vector \"{label}\"")
        })?;
    }
    if out.is_empty() {
        return Err(parse_error("vectors".into(), "no allocation vectors"));
    }
    Ok(out)
}

fn check_entry(v: f64, location: impl Fn() -> String) -> Result<f64> {
    if !v.is_finite() {
        return Err(parse_error(location(), format!("entry {v} is not finite")));
    }
    if v < 0.0 {
        return Err(parse_error(location(), format!("entry {v} is negative")));
    }
    Ok(v)
}

/// Appends a vector after checking it is non-empty, not all zero and as
/// long as the earlier ones.
fn push(
    out: &mut Vec<Labeled>,
    label: String,
    values: Vec<f64>,
    location: impl Fn() -> String,
) -> Result<()> {
    if values.is_empty() {
        return Err(parse_error(
            location(),
            format!("\"{label}\" has no entries"),
        ));
    }
    if let Some((first, x)) = out.first() {
        if x.len() != values.len() {
            return Err(parse_error(
                location(),
                format!(
                    "\"{label}\" has {} entries but \"{first}\" has {}",
                    values.len(),
                    x.len()
                ),
            ));
        }
    }
    let x = Allocation::new(values)
        .map_err(|e| parse_error(location(), format!("\"{label}\": {e}")))?;
    out.push((label, x));
    Ok(())
}
