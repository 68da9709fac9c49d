//! CSV and JSON emission. Infinities are written as `inf` / `-inf`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Shortest round-trip decimal, with `-inf`, `inf` and `nan` spelled out.
pub fn format_number(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        v.to_string()
    }
}

pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, sink: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

pub fn write_json<T: Serialize>(value: &T, sink: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *sink, value).map_err(io)?;
    writeln!(sink).map_err(io)
}

/// Single-line error object for failed runs.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(format_number(5.0), "5");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn table() {
        let mut t = CsvTable::new(&["label", "beta", "f"]);
        t.push(vec!["a b".into(), "1".into(), "-inf".into()]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "label,beta,f\na b,1,-inf\n"
        );
    }

    #[test]
    fn error_object() {
        let s = error_json(&Error::EmptyRegion);
        assert_eq!(
            s,
            r#"{"error":"region","message":"feasible region is empty"}"#
        );
    }
}
