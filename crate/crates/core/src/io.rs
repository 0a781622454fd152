//! Text output conventions shared by every table the crate writes.
//!
//! CSV: comma-separated, one header row, LF line endings, floats printed
//! with 17 significant digits so that a parse recovers the exact `f64`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

/// Formats a float with 17 significant digits (`1.2345678901234567e0`).
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// A CSV cell: floats get the 17-digit treatment, everything else is
/// written verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Complex number as it appears in JSON reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexReport {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub phase: f64,
}

impl From<Complex64> for ComplexReport {
    fn from(z: Complex64) -> Self {
        ComplexReport {
            re: z.re,
            im: z.im,
            abs: z.norm(),
            phase: z.arg(),
        }
    }
}

/// Pretty JSON with a trailing newline; field order follows declaration
/// order of the serialised structs.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["n", "x", "name"]);
        t.push(vec![Cell::from(3usize), Cell::from(0.5), Cell::from("a")]);
        assert_eq!(t.to_csv(), "n,x,name\n3,5.0000000000000000e-1,a\n");
    }
}
