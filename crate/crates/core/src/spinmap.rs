//! Angular-momentum belts on the sphere of radius `√(J(J+1))` and their
//! stereographic images in the oscillator phase plane.
//!
//! Belt `n` (counted from the south pole, `m = n - J`) is the slab
//! `m - 1/2 ≤ z ≤ m + 1/2` clipped to the sphere. By the hat-box lemma
//! every interior belt has area `2πR`. Projecting from the north pole onto
//! the plane tangent at the south pole and shrinking radii by `√R` maps the
//! southern belts onto annuli close to the Bohr-Sommerfeld bands
//! `√(2n) ≤ r ≤ √(2(n+1))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{to_json, Cell, Table};

/// Largest `J` accepted.
pub const MAX_J: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSphere {
    /// `2J`
    pub twice_j: u64,
    pub j: f64,
    /// `√(J(J+1))`
    pub radius: f64,
}

impl SpinSphere {
    /// `J` must be a positive integer or half-integer.
    pub fn new(j: f64) -> Result<Self> {
        if !(j.is_finite() && j > 0.0 && j <= MAX_J) {
            return Err(Error::invalid(format!("J must lie in (0, {MAX_J}], got {j}")));
        }
        let twice = (2.0 * j).round();
        if (2.0 * j - twice).abs() > 1e-9 {
            return Err(Error::invalid(format!("2J must be an integer, got J = {j}")));
        }
        Ok(Self::from_twice_j(twice as u64))
    }

    /// Sphere for `J = twice_j / 2`.
    pub fn from_twice_j(twice_j: u64) -> Self {
        assert!(twice_j > 0, "J must be positive");
        let j = twice_j as f64 / 2.0;
        SpinSphere {
            twice_j,
            j,
            radius: (j * (j + 1.0)).sqrt(),
        }
    }

    /// Number of belts, `2J + 1`.
    pub fn belt_count(&self) -> usize {
        self.twice_j as usize + 1
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.belt_count() {
            return Err(Error::OutOfRange {
                what: "belt",
                index: n,
                max: self.belt_count() - 1,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Belt {
    /// Index from the south pole.
    pub n: usize,
    /// `J_z` eigenvalue `n - J`.
    pub m: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

impl Belt {
    /// Hat-box area `2πR (z_hi - z_lo)`.
    pub fn area(&self, sphere: &SpinSphere) -> f64 {
        2.0 * PI * sphere.radius * (self.z_hi - self.z_lo)
    }
}

pub fn belt(sphere: &SpinSphere, n: usize) -> Result<Belt> {
    sphere.check_index(n)?;
    let r = sphere.radius;
    let m = n as f64 - sphere.j;
    let z_lo = if n == 0 { -r } else { (m - 0.5).clamp(-r, r) };
    let z_hi = if n + 1 == sphere.belt_count() {
        r
    } else {
        (m + 0.5).clamp(-r, r)
    };
    Ok(Belt { n, m, z_lo, z_hi })
}

/// All `2J + 1` belts, south to north.
pub fn belts(sphere: &SpinSphere) -> Vec<Belt> {
    (0..sphere.belt_count())
        .map(|n| belt(sphere, n).expect("index in range"))
        .collect()
}

pub fn belt_area(sphere: &SpinSphere, n: usize) -> Result<f64> {
    Ok(belt(sphere, n)?.area(sphere))
}

/// Which pole the projection is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    /// Project from the north pole; southern belts land near the origin.
    South,
    /// Mirror image: project from the south pole.
    North,
}

/// Scaled image radius `ρ/√R` of the circle at height `z`, with
/// `ρ = 2R √(R² - z²) / (R - z)` (north-pole projection, `z` mirrored for
/// [`Hemisphere::North`]).
pub fn project(sphere: &SpinSphere, z: f64, hemisphere: Hemisphere) -> Result<f64> {
    let r = sphere.radius;
    let z = match hemisphere {
        Hemisphere::South => z,
        Hemisphere::North => -z,
    };
    if !(z >= -r && z < r) {
        return Err(Error::invalid(format!(
            "height {z} is outside [-R, R) for R = {r}; the projection pole has no image"
        )));
    }
    // R² - z² = (R - z)(R + z) keeps the south pole exactly at zero
    let rho = 2.0 * r * ((r + z) / (r - z)).sqrt();
    Ok(rho / r.sqrt())
}

/// Image of a belt in the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectedBand {
    pub n: usize,
    pub m: f64,
    pub rho_lo: f64,
    /// Infinite for the belt that touches the projection pole.
    pub rho_hi: f64,
    pub open: bool,
}

impl ProjectedBand {
    /// `π (ρ_hi² - ρ_lo²)`; infinite for an open band.
    pub fn area(&self) -> f64 {
        if self.open {
            f64::INFINITY
        } else {
            PI * (self.rho_hi * self.rho_hi - self.rho_lo * self.rho_lo)
        }
    }
}

pub fn projected_band(sphere: &SpinSphere, n: usize) -> Result<ProjectedBand> {
    let b = belt(sphere, n)?;
    let rho_lo = project(sphere, b.z_lo, Hemisphere::South)?;
    let open = b.z_hi >= sphere.radius;
    let rho_hi = if open {
        f64::INFINITY
    } else {
        project(sphere, b.z_hi, Hemisphere::South)?
    };
    Ok(ProjectedBand {
        n,
        m: b.m,
        rho_lo,
        rho_hi,
        open,
    })
}

/// Area of the projected band; the open top band is an error.
pub fn projected_band_area(sphere: &SpinSphere, n: usize) -> Result<f64> {
    let band = projected_band(sphere, n)?;
    if band.open {
        return Err(Error::invalid(format!(
            "belt {n} touches the projection pole; its image is unbounded"
        )));
    }
    Ok(band.area())
}

pub fn projected_bands(sphere: &SpinSphere) -> Vec<ProjectedBand> {
    (0..sphere.belt_count())
        .map(|n| projected_band(sphere, n).expect("index in range"))
        .collect()
}

/// Largest `|ρ̃_n / √(2n) - 1|` over boundaries `1..=n_max`.
pub fn max_radius_deviation(sphere: &SpinSphere, n_max: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for n in 1..=n_max {
        let rho = projected_band(sphere, n)?.rho_lo;
        worst = worst.max((rho / (2.0 * n as f64).sqrt() - 1.0).abs());
    }
    Ok(worst)
}

/// Inner radius of band `n` across several `J`, against `√(2n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    #[serde(rename = "J_values")]
    pub j_values: Vec<f64>,
    pub n: usize,
    pub radii: Vec<f64>,
    pub target: f64,
}

pub fn convergence(j_values: &[f64], n: usize) -> Result<ConvergenceReport> {
    let radii = j_values
        .iter()
        .map(|&j| Ok(projected_band(&SpinSphere::new(j)?, n)?.rho_lo))
        .collect::<Result<_>>()?;
    Ok(ConvergenceReport {
        j_values: j_values.to_vec(),
        n,
        radii,
        target: (2.0 * n as f64).sqrt(),
    })
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// CSV with header `J,n,rho,target`.
    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["J", "n", "rho", "target"]);
        for (j, r) in self.j_values.iter().zip(&self.radii) {
            t.push(vec![
                Cell::from(*j),
                Cell::from(self.n),
                Cell::from(*r),
                Cell::from(self.target),
            ]);
        }
        t.to_csv()
    }
}

/// CSV with header `n,m,z_lo,z_hi,area`.
pub fn belts_csv(sphere: &SpinSphere, belts: &[Belt]) -> String {
    let mut t = Table::new(&["n", "m", "z_lo", "z_hi", "area"]);
    for b in belts {
        t.push(vec![
            Cell::from(b.n),
            Cell::from(b.m),
            Cell::from(b.z_lo),
            Cell::from(b.z_hi),
            Cell::from(b.area(sphere)),
        ]);
    }
    t.to_csv()
}

/// CSV with header `n,m,rho_lo,rho_hi,area`.
pub fn bands_csv(bands: &[ProjectedBand]) -> String {
    let mut t = Table::new(&["n", "m", "rho_lo", "rho_hi", "area"]);
    for b in bands {
        t.push(vec![
            Cell::from(b.n),
            Cell::from(b.m),
            Cell::from(b.rho_lo),
            Cell::from(b.rho_hi),
            Cell::from(b.area()),
        ]);
    }
    t.to_csv()
}
