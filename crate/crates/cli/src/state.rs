//! State specifications accepted on the command line:
//!
//! ```text
//! vacuum
//! fock:<n>
//! coherent:<re>[,<im>]
//! mixture:<spec>@<w>;<spec>@<w>...
//! ```
//!
//! Mixture components are themselves `vacuum`, `fock` or `coherent`.

use num_complex::Complex64;
use phasezone::fock::{coherent_amplitudes, default_truncation, DensityMatrix, FockState};

use crate::CliError;

/// Largest number-state index accepted from the command line.
const MAX_FOCK: usize = 2000;

pub fn parse_state(spec: &str) -> Result<DensityMatrix, CliError> {
    let spec = spec.trim();
    if let Some(body) = spec.strip_prefix("mixture:") {
        let mut parts = Vec::new();
        for item in body.split(';').filter(|s| !s.trim().is_empty()) {
            let (inner, weight) = item
                .rsplit_once('@')
                .ok_or_else(|| usage(format!("mixture component '{item}' lacks an @weight")))?;
            let w: f64 = parse_number(weight, "mixture weight")?;
            if inner.trim().starts_with("mixture:") {
                return Err(usage("mixtures cannot be nested"));
            }
            parts.push((w, pure(inner)?.density_matrix()));
        }
        if parts.is_empty() {
            return Err(usage("empty mixture"));
        }
        return Ok(DensityMatrix::mixture(&parts)?);
    }
    Ok(pure(spec)?.density_matrix())
}

fn pure(spec: &str) -> Result<FockState, CliError> {
    let spec = spec.trim();
    if spec == "vacuum" {
        return Ok(FockState::vacuum());
    }
    if let Some(n) = spec.strip_prefix("fock:") {
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| usage(format!("'{n}' is not a number-state index")))?;
        if n > MAX_FOCK {
            return Err(usage(format!("number-state index {n} exceeds {MAX_FOCK}")));
        }
        return Ok(FockState::number(n, n)?);
    }
    if let Some(body) = spec.strip_prefix("coherent:") {
        let (re, im) = match body.split_once(',') {
            Some((re, im)) => (parse_number(re, "real part")?, parse_number(im, "imaginary part")?),
            None => (parse_number(body, "amplitude")?, 0.0),
        };
        let beta = Complex64::new(re, im);
        return Ok(coherent_amplitudes(beta, default_truncation(0.0, beta.norm()))?);
    }
    Err(usage(format!(
        "unknown state '{spec}' (expected vacuum, fock:<n>, coherent:<re>[,<im>] or mixture:...)"
    )))
}

fn parse_number(text: &str, what: &str) -> Result<f64, CliError> {
    let x: f64 = text
        .trim()
        .parse()
        .map_err(|_| usage(format!("{what} '{}' is not a number", text.trim())))?;
    if !x.is_finite() {
        return Err(usage(format!("{what} must be finite")));
    }
    Ok(x)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_states() {
        assert_eq!(parse_state("vacuum").unwrap().support(), 0);
        assert_eq!(parse_state("fock:3").unwrap().support(), 3);
        let rho = parse_state("coherent:1.5,-0.5").unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let rho = parse_state(" coherent:-2 ").unwrap();
        assert!(rho.support() > 4);
    }

    #[test]
    fn mixtures() {
        let rho = parse_state("mixture:vacuum@1;fock:2@3").unwrap();
        assert!((rho.entries()[(0, 0)].re - 0.25).abs() < 1e-15);
        assert!((rho.entries()[(2, 2)].re - 0.75).abs() < 1e-15);
        let rho = parse_state("mixture:coherent:1,1@0.5;fock:1@0.5;").unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed() {
        for bad in [
            "",
            "fock",
            "fock:-1",
            "fock:x",
            "coherent:",
            "coherent:1,nan",
            "squeezed:1",
            "mixture:",
            "mixture:vacuum",
            "mixture:vacuum@-1",
            "mixture:mixture:vacuum@1@1",
            "fock:100000",
        ] {
            assert!(parse_state(bad).is_err(), "{bad}");
        }
    }
}
