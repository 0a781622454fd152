//! Bohr-Sommerfeld bands in the dimensionless phase plane and the
//! area-of-overlap estimate of a coherent state's energy distribution.
//!
//! Band `n` is the annulus between the orbits enclosing areas `2πn` and
//! `2π(n+1)` (with ħ = 1), i.e. radii `√(2n)` and `√(2(n+1))`. A coherent
//! state of amplitude β is represented by a disc of radius `√2` centred at
//! distance `√2 |β|`; the fraction of the disc falling into each band is the
//! estimate of `P_n`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{to_json, Cell, Table};
use crate::numerics::ln_factorial;

/// Radius of the disc that stands in for a coherent state. With this value
/// the undisplaced disc fills band 0 exactly.
pub const DISC_RADIUS: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub n: usize,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Band {
    /// Enclosed-area difference, `2π` up to rounding.
    pub fn area(&self) -> f64 {
        PI * (self.r_outer * self.r_outer - self.r_inner * self.r_inner)
    }
}

/// The `n`-th band.
pub fn band(n: usize) -> Band {
    Band {
        n,
        r_inner: (2.0 * n as f64).sqrt(),
        r_outer: (2.0 * (n + 1) as f64).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disc {
    /// Distance of the centre from the origin.
    pub d: f64,
    pub r: f64,
}

impl Disc {
    pub fn new(d: f64, r: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) || !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!(
                "disc needs d >= 0 and r > 0, got d = {d}, r = {r}"
            )));
        }
        Ok(Disc { d, r })
    }

    /// The disc representing a coherent state of amplitude `|β|`.
    pub fn coherent(beta_mag: f64) -> Result<Self> {
        Self::new(std::f64::consts::SQRT_2 * beta_mag, DISC_RADIUS)
    }

    pub fn area(&self) -> f64 {
        PI * self.r * self.r
    }
}

/// Area of the intersection of two discs with radii `r1`, `r2` and centre
/// separation `d`. A zero radius gives zero area.
///
/// Computed as two circular segments whose half-angles come from the
/// factored forms of `1 ± cos φ`, which stay accurate at near-tangency.
pub fn circle_circle_lens(r1: f64, r2: f64, d: f64) -> f64 {
    // canonical order makes the function exactly symmetric
    let (a, b) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let d = d.abs();
    if a <= 0.0 || d >= a + b {
        return 0.0;
    }
    if d <= b - a {
        return PI * a * a;
    }
    let k1 = -d + a + b;
    let k2 = d + a - b;
    let k3 = d - a + b;
    let k4 = d + a + b;
    // half-angles subtended at each centre
    let phi_a = 2.0 * (k1 * k3).sqrt().atan2((k2 * k4).sqrt());
    let phi_b = 2.0 * (k1 * k2).sqrt().atan2((k3 * k4).sqrt());
    let lens = a * a * segment(phi_a) + b * b * segment(phi_b);
    lens.clamp(0.0, PI * a * a)
}

/// `φ - sin φ cos φ`, the unit-radius segment area with half-angle `φ`.
fn segment(phi: f64) -> f64 {
    let x = 2.0 * phi;
    if x < 0.1 {
        // (x - sin x)/2 without cancellation
        let x2 = x * x;
        0.5 * x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        0.5 * (x - x.sin())
    }
}

/// Fewest bands whose union covers the coherent-state disc, plus one so the
/// last outer edge clears the disc strictly.
pub fn bands_needed(beta_mag: f64) -> usize {
    let edge = beta_mag + 1.0;
    (edge * edge).ceil() as usize + 1
}

/// Area-of-overlap distribution over bands `0..n`, where `n` is
/// `n_bands` or [`bands_needed`], whichever is larger.
pub fn overlap_distribution(beta_mag: f64, n_bands: usize) -> Result<Vec<f64>> {
    if !(beta_mag.is_finite() && beta_mag >= 0.0) {
        return Err(Error::invalid(format!(
            "|β| must be finite and non-negative, got {beta_mag}"
        )));
    }
    let disc = Disc::coherent(beta_mag)?;
    let n = n_bands.max(bands_needed(beta_mag));
    let norm = disc.area();
    let mut inner = 0.0;
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        let b = band(k);
        let outer = circle_circle_lens(disc.r, b.r_outer, disc.d);
        p.push((outer - inner) / norm);
        inner = outer;
    }
    Ok(p)
}

/// Poisson weights `e^{-μ} μ^n / n!` for `n < len`.
pub fn poisson_pmf(mean: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            if mean == 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-mean + n as f64 * mean.ln() - ln_factorial(n)).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub p_overlap: f64,
    pub p_poisson: f64,
}

/// Overlap estimate against the exact coherent-state statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonComparison {
    pub beta: f64,
    pub overlap_mean: f64,
    pub poisson_mean: f64,
    pub overlap_variance: f64,
    pub poisson_variance: f64,
    /// `½ Σ |p_overlap - p_poisson|` over the table.
    pub tv_distance: f64,
    pub table: Vec<ComparisonRow>,
}

fn moments(p: &[f64]) -> (f64, f64) {
    let mean: f64 = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
    let var: f64 = p.iter().enumerate().map(|(n, q)| (n as f64 - mean).powi(2) * q).sum();
    (mean, var)
}

pub fn compare_poisson(beta_mag: f64, n_bands: usize) -> Result<PoissonComparison> {
    let mut overlap = overlap_distribution(beta_mag, n_bands)?;
    let mu = beta_mag * beta_mag;
    // long enough that the Poisson tail is below double precision
    let len = overlap.len().max((mu + 12.0 * mu.sqrt() + 40.0).ceil() as usize);
    overlap.resize(len, 0.0);
    let poisson = poisson_pmf(mu, len);
    let (overlap_mean, overlap_variance) = moments(&overlap);
    let (poisson_mean, poisson_variance) = moments(&poisson);
    let tv_distance = 0.5 * overlap.iter().zip(&poisson).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let table = overlap
        .iter()
        .zip(&poisson)
        .enumerate()
        .map(|(n, (a, b))| ComparisonRow {
            n,
            p_overlap: *a,
            p_poisson: *b,
        })
        .collect();
    Ok(PoissonComparison {
        beta: beta_mag,
        overlap_mean,
        poisson_mean,
        overlap_variance,
        poisson_variance,
        tv_distance,
        table,
    })
}

impl PoissonComparison {
    /// CSV with header `n,p_overlap,p_poisson`.
    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["n", "p_overlap", "p_poisson"]);
        for row in &self.table {
            t.push(vec![
                Cell::from(row.n),
                Cell::from(row.p_overlap),
                Cell::from(row.p_poisson),
            ]);
        }
        t.to_csv()
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_radii() {
        let b0 = band(0);
        assert_eq!(b0.r_inner, 0.0);
        assert!((b0.r_outer - 2f64.sqrt()).abs() < 1e-15);
        assert!((band(4).r_inner / band(1).r_inner - 2.0).abs() < 1e-15);
        for n in [0, 1, 7, 1000] {
            assert!((band(n).area() - 2.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn lens_special_cases() {
        assert_eq!(circle_circle_lens(1.0, 2.0, 0.0), PI);
        assert_eq!(circle_circle_lens(1.0, 1.0, 3.0), 0.0);
        assert_eq!(circle_circle_lens(0.0, 1.0, 0.5), 0.0);
        let want = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((circle_circle_lens(1.0, 1.0, 1.0) - want).abs() < 1e-14);
        assert_eq!(circle_circle_lens(0.7, 1.9, 1.5), circle_circle_lens(1.9, 0.7, 1.5));
    }

    #[test]
    fn vacuum_fills_band_zero() {
        let p = overlap_distribution(0.0, 1).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(p[1..].iter().all(|q| q.abs() < 1e-15));
    }

    #[test]
    fn auto_sizing_and_partition() {
        for beta in [0.0, 0.5, 1.0, 2.0, 5.0, 7.3] {
            let p = overlap_distribution(beta, 0).unwrap();
            assert_eq!(p.len(), bands_needed(beta));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12, "β={beta}");
            assert!(p.iter().all(|q| *q >= 0.0));
        }
        assert_eq!(overlap_distribution(1.0, 50).unwrap().len(), 50);
        assert!(overlap_distribution(-1.0, 0).is_err());
    }

    #[test]
    fn beta_five_is_centred_near_twenty_five() {
        let r = compare_poisson(5.0, 0).unwrap();
        assert!((23.75..=26.25).contains(&r.overlap_mean), "{}", r.overlap_mean);
        assert!((r.poisson_mean - 25.0).abs() < 1e-9);
        assert!((r.poisson_variance - 25.0).abs() < 1e-9);
        assert!(r.tv_distance > 0.01);
        let peak = r
            .table
            .iter()
            .max_by(|a, b| a.p_overlap.total_cmp(&b.p_overlap))
            .unwrap()
            .n;
        assert!((23..=27).contains(&peak), "peak {peak}");
    }

    #[test]
    fn zero_beta_comparison_is_exact() {
        let r = compare_poisson(0.0, 0).unwrap();
        assert_eq!(r.tv_distance, 0.0);
        assert_eq!(r.overlap_mean, 0.0);
        let csv = r.to_csv();
        assert!(csv.starts_with("n,p_overlap,p_poisson\n0,1.0000000000000000e0,1.0000000000000000e0\n"));
    }
}
