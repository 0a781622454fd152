//! Re-reads files written by the other subcommands and checks them against
//! the output contract.

use phasezone::io::fmt_float;

/// Known CSV layouts, by header.
const SCHEMAS: &[(&str, &[&str])] = &[
    ("wigner", &["u", "v", "w"]),
    ("zones", &["n", "rho", "re_Un", "im_Un", "abs_Un", "phase_Un"]),
    ("overlap", &["n", "p_overlap", "p_poisson"]),
    ("bands", &["n", "m", "rho_lo", "rho_hi", "area"]),
    ("belts", &["n", "m", "z_lo", "z_hi", "area"]),
    ("summary", &["quantity", "re", "im", "abs", "phase"]),
    ("convergence", &["J", "n", "rho", "target"]),
];

/// Columns holding integers or labels rather than floats.
const NON_FLOAT: &[&str] = &["n", "quantity"];

/// Outcome of a successful check.
#[derive(Debug, PartialEq, Eq)]
pub struct Report {
    pub schema: &'static str,
    pub rows: usize,
}

/// Checks a CSV produced by this tool: known header, LF endings, constant
/// field count, and floats that survive a parse/print round trip.
pub fn validate_csv(text: &str) -> Result<Report, String> {
    if text.contains('\r') {
        return Err("carriage return found; lines must end in LF".into());
    }
    if !text.ends_with('\n') {
        return Err("file does not end with a newline".into());
    }
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    let (schema, _) = SCHEMAS
        .iter()
        .find(|(_, cols)| *cols == header.as_slice())
        .ok_or_else(|| format!("unknown header '{}'", header.join(",")))?;
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(format!(
                "line {lineno}: {} fields, expected {}",
                cells.len(),
                header.len()
            ));
        }
        for (col, cell) in header.iter().zip(&cells) {
            check_cell(col, cell).map_err(|e| format!("line {lineno}, column {col}: {e}"))?;
        }
        rows += 1;
    }
    Ok(Report { schema, rows })
}

fn check_cell(column: &str, cell: &str) -> Result<(), String> {
    if column == "quantity" {
        return if cell.is_empty() {
            Err("empty label".into())
        } else {
            Ok(())
        };
    }
    if NON_FLOAT.contains(&column) {
        return cell
            .parse::<u64>()
            .map(|_| ())
            .map_err(|_| format!("'{cell}' is not a non-negative integer"));
    }
    let x: f64 = cell.parse().map_err(|_| format!("'{cell}' is not a number"))?;
    let printed = fmt_float(x);
    if printed != cell {
        return Err(format!("'{cell}' does not round-trip (reprinted as '{printed}')"));
    }
    Ok(())
}

/// JSON outputs are single objects.
pub fn validate_json(text: &str) -> Result<Report, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if !value.is_object() {
        return Err("top level is not an object".into());
    }
    Ok(Report {
        schema: "json",
        rows: 1,
    })
}
