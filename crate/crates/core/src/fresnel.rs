//! Fresnel zones on a spherical wavefront and the Huygens-Fresnel
//! integral for the field on the axis.
//!
//! A point source at `O` emits a spherical wave; its wavefront is a sphere
//! of radius `r0` and the observation point `P` sits a further distance
//! `b` along the axis. A point `Q` on the wavefront at polar angle `θ`
//! (seen from `O`) lies at distance
//!
//! ```text
//! s(θ)² = r0² + (r0 + b)² - 2 r0 (r0 + b) cos θ = b² + 4 r0 (r0 + b) sin²(θ/2)
//! ```
//!
//! from `P`. Zone `n` is the belt `b + nλ/2 ≤ s ≤ b + (n+1)λ/2`.
//!
//! The field at `P` is
//!
//! ```text
//! U = A e^{ik r0} / r0 · (-i/λ) ∫ e^{iks}/s K(χ) dS,   K = (1 + cos χ)/2,
//! ```
//!
//! reduced to a θ-integral by azimuthal symmetry and evaluated zone by zone
//! with a Gauss-Legendre rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{to_json, Cell, ComplexReport, Table};
use crate::numerics::{gauss_legendre, loglog_slope};

/// Gauss-Legendre nodes per zone unless asked otherwise.
pub const DEFAULT_DENSITY: usize = 16;
/// Fewest nodes per zone accepted.
pub const MIN_DENSITY: usize = 10;
/// Smallest accepted `r0/λ` and `b/λ`.
pub const MIN_WAVELENGTHS: f64 = 10.0;
/// Fraction of the zones in a cap covered by the raised-cosine taper.
pub const TAPER_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FresnelGeometry {
    pub r0: f64,
    pub b: f64,
    pub lambda: f64,
    pub amplitude: f64,
    pub k: f64,
}

impl FresnelGeometry {
    pub fn new(r0: f64, b: f64, lambda: f64, amplitude: f64) -> Result<Self> {
        for (name, v) in [("r0", r0), ("b", b), ("lambda", lambda), ("amplitude", amplitude)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if r0 / lambda < MIN_WAVELENGTHS || b / lambda < MIN_WAVELENGTHS {
            return Err(Error::invalid(format!(
                "r0 and b must each be at least {MIN_WAVELENGTHS} wavelengths (r0/λ = {}, b/λ = {})",
                r0 / lambda,
                b / lambda
            )));
        }
        Ok(FresnelGeometry {
            r0,
            b,
            lambda,
            amplitude,
            k: 2.0 * PI / lambda,
        })
    }

    /// Source-to-observer distance `r0 + b`.
    pub fn distance(&self) -> f64 {
        self.r0 + self.b
    }

    /// Distance from the wavefront point at polar angle `theta` to `P`.
    pub fn path(&self, theta: f64) -> f64 {
        let h = (0.5 * theta).sin();
        (self.b * self.b + 4.0 * self.r0 * self.distance() * h * h).sqrt()
    }

    /// Index of the last zone boundary that still lies on the wavefront.
    pub fn last_boundary(&self) -> usize {
        // s ≤ 2 r0 + b  ⇔  n ≤ 4 r0 / λ; a hair of slack absorbs rounding
        (4.0 * self.r0 / self.lambda * (1.0 + 1e-12)).floor() as usize
    }

    /// Number of complete zones on the wavefront.
    pub fn feasible_zones(&self) -> usize {
        self.last_boundary()
    }

    /// Unobstructed spherical wave at `P`.
    pub fn free_field(&self) -> Complex64 {
        let d = self.distance();
        Complex64::from_polar(self.amplitude / d, self.k * d)
    }

    /// Continuous zone coordinate `(s - b) / (λ/2)`.
    fn zone_coordinate(&self, s: f64) -> f64 {
        (s - self.b) / (0.5 * self.lambda)
    }

    fn prefactor(&self) -> Complex64 {
        // A e^{ik r0}/r0 · (-i/λ) · 2π r0²
        Complex64::from_polar(self.amplitude / self.r0, self.k * self.r0)
            * Complex64::new(0.0, -1.0 / self.lambda)
            * (2.0 * PI * self.r0 * self.r0)
    }
}

/// Polar angle of zone boundary `n`, where `s = b + nλ/2`.
pub fn zone_boundary_angle(geom: &FresnelGeometry, n: usize) -> Result<f64> {
    let max = geom.last_boundary();
    if n > max {
        return Err(Error::InfeasibleZone { n, max });
    }
    let s = geom.b + n as f64 * 0.5 * geom.lambda;
    let x = ((s * s - geom.b * geom.b) / (4.0 * geom.r0 * geom.distance())).max(0.0);
    Ok(2.0 * x.sqrt().min(1.0).asin())
}

/// Radius of zone boundary `n` about the axis, `r0 sin θ_n`.
pub fn boundary_radius(geom: &FresnelGeometry, n: usize) -> Result<f64> {
    Ok(geom.r0 * zone_boundary_angle(geom, n)?.sin())
}

/// Obliquity `K(χ)` and the angle `χ` between the outward normal at the
/// wavefront point and the direction towards `P`.
pub fn inclination(geom: &FresnelGeometry, theta: f64) -> (f64, f64) {
    let s = geom.path(theta);
    let d = geom.distance();
    let cos_chi = ((d * d - geom.r0 * geom.r0 - s * s) / (2.0 * geom.r0 * s)).clamp(-1.0, 1.0);
    (0.5 * (1.0 + cos_chi), cos_chi.acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zone {
    pub n: usize,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    /// Inclination at the angular midpoint.
    pub chi_mid: f64,
    /// Outer boundary radius `r0 sin θ_hi`.
    pub rho: f64,
}

pub fn zone(geom: &FresnelGeometry, n: usize) -> Result<Zone> {
    let theta_lo = zone_boundary_angle(geom, n)?;
    let theta_hi = zone_boundary_angle(geom, n + 1)?;
    let half = 0.5 * geom.lambda;
    Ok(Zone {
        n,
        theta_lo,
        theta_hi,
        s_lo: geom.b + n as f64 * half,
        s_hi: geom.b + (n + 1) as f64 * half,
        chi_mid: inclination(geom, 0.5 * (theta_lo + theta_hi)).1,
        rho: geom.r0 * theta_hi.sin(),
    })
}

/// Gauss-Legendre rule reused across zones.
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(density: usize) -> Result<Self> {
        if density < MIN_DENSITY {
            return Err(Error::invalid(format!(
                "quadrature density {density} is below the floor of {MIN_DENSITY} nodes per zone"
            )));
        }
        let (nodes, weights) = gauss_legendre(density);
        Ok(Rule { nodes, weights })
    }

    /// `∫_lo^hi e^{iks}/s K sin θ w(ν) dθ`, unscaled.
    fn segment(&self, geom: &FresnelGeometry, lo: f64, hi: f64, taper: &Taper) -> Complex64 {
        let mid = 0.5 * (hi + lo);
        let half = 0.5 * (hi - lo);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let theta = mid + half * x;
            let s = geom.path(theta);
            let (kf, _) = inclination(geom, theta);
            let weight = taper.weight(geom.zone_coordinate(s));
            acc += Complex64::from_polar(w * kf * theta.sin() * weight / s, geom.k * s);
        }
        acc * half
    }
}

/// Raised-cosine roll-off in the continuous zone coordinate.
enum Taper {
    None,
    RaisedCosine { start: f64, end: f64 },
}

impl Taper {
    fn weight(&self, nu: f64) -> f64 {
        match *self {
            Taper::None => 1.0,
            Taper::RaisedCosine { start, end } => {
                if nu <= start {
                    1.0
                } else if nu >= end {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (nu - start) / (end - start)).cos())
                }
            }
        }
    }
}

/// Boundary angles `0 = θ_0 < θ_1 < …` clipped to `theta_max`, with the
/// partial zone beyond the last boundary running up to `π`.
fn segments(geom: &FresnelGeometry, theta_max: f64) -> Result<Vec<(f64, f64)>> {
    if !(theta_max > 0.0 && theta_max <= PI) {
        return Err(Error::invalid(format!("theta_max must lie in (0, π], got {theta_max}")));
    }
    let mut out = Vec::new();
    let mut lo = 0.0;
    let last = geom.last_boundary();
    for n in 1..=last + 1 {
        let hi = if n <= last { zone_boundary_angle(geom, n)? } else { PI };
        let hi_clipped = hi.min(theta_max);
        if hi_clipped > lo {
            out.push((lo, hi_clipped));
        }
        if hi >= theta_max {
            break;
        }
        lo = hi;
    }
    Ok(out)
}

/// Contribution of zone `n` alone.
pub fn zone_contribution(geom: &FresnelGeometry, n: usize, density: usize) -> Result<Complex64> {
    let rule = Rule::new(density)?;
    let z = zone(geom, n)?;
    Ok(geom.prefactor() * rule.segment(geom, z.theta_lo, z.theta_hi, &Taper::None))
}

/// Contributions of zones `0..count`, evaluated in parallel.
pub fn zone_contributions(geom: &FresnelGeometry, count: usize, density: usize) -> Result<Vec<Complex64>> {
    let rule = Rule::new(density)?;
    if count > geom.feasible_zones() {
        return Err(Error::InfeasibleZone {
            n: count - 1,
            max: geom.feasible_zones().saturating_sub(1),
        });
    }
    let angles: Vec<f64> = (0..=count)
        .map(|n| zone_boundary_angle(geom, n))
        .collect::<Result<_>>()?;
    let pre = geom.prefactor();
    Ok((0..count)
        .into_par_iter()
        .map(|n| pre * rule.segment(geom, angles[n], angles[n + 1], &Taper::None))
        .collect())
}

/// Hard-edged cap `0 ≤ θ ≤ theta_max`, integrated zone by zone.
pub fn huygens_integral(geom: &FresnelGeometry, theta_max: f64, density: usize) -> Result<Complex64> {
    let rule = Rule::new(density)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in segments(geom, theta_max)? {
        acc += rule.segment(geom, lo, hi, &Taper::None);
    }
    Ok(geom.prefactor() * acc)
}

/// Cap `0 ≤ θ ≤ theta_max` with a raised-cosine roll-off over the last
/// [`TAPER_FRACTION`] of the zones it contains.
pub fn huygens_integral_tapered(geom: &FresnelGeometry, theta_max: f64, density: usize) -> Result<Complex64> {
    let rule = Rule::new(density)?;
    let end = geom.zone_coordinate(geom.path(theta_max.min(PI)));
    let taper = Taper::RaisedCosine {
        start: (1.0 - TAPER_FRACTION) * end,
        end,
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in segments(geom, theta_max)? {
        acc += rule.segment(geom, lo, hi, &taper);
    }
    Ok(geom.prefactor() * acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMode {
    /// Signed magnitudes `Σ (-1)^n |U_n|` along the phase of `U_0`.
    Raw,
    /// Mean of the last two raw partial sums.
    Averaged,
}

/// Raw partial sums `S_1 … S_N` of the alternating series, `S_m` holding
/// `m` terms.
pub fn partial_sums(contributions: &[Complex64]) -> Vec<Complex64> {
    let Some(first) = contributions.first() else {
        return Vec::new();
    };
    let phase = Complex64::from_polar(1.0, first.arg());
    let mut acc = 0.0;
    contributions
        .iter()
        .enumerate()
        .map(|(n, u)| {
            acc += if n % 2 == 0 { u.norm() } else { -u.norm() };
            phase * acc
        })
        .collect()
}

pub fn zone_sum(geom: &FresnelGeometry, count: usize, mode: SumMode, density: usize) -> Result<Complex64> {
    if count == 0 {
        return Err(Error::invalid("zone sum needs at least one zone"));
    }
    let sums = partial_sums(&zone_contributions(geom, count, density)?);
    Ok(match mode {
        SumMode::Raw => sums[count - 1],
        SumMode::Averaged if count == 1 => 0.5 * sums[0],
        SumMode::Averaged => 0.5 * (sums[count - 1] + sums[count - 2]),
    })
}

/// Which zones a plate leaves open, by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZoneMask {
    Odd,
    Even,
    All,
    List(Vec<usize>),
}

impl ZoneMask {
    /// Open indices below `count`, ascending and without repeats.
    pub fn indices(&self, count: usize) -> Result<Vec<usize>> {
        Ok(match self {
            ZoneMask::Odd => (1..count).step_by(2).collect(),
            ZoneMask::Even => (0..count).step_by(2).collect(),
            ZoneMask::All => (0..count).collect(),
            ZoneMask::List(list) => {
                if let Some(bad) = list.iter().find(|&&n| n >= count) {
                    return Err(Error::OutOfRange {
                        what: "open zone",
                        index: *bad,
                        max: count.saturating_sub(1),
                    });
                }
                let mut v = list.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        })
    }
}

/// Field behind a plate that blocks every zone of the first `count` except
/// those in `mask`.
pub fn zone_plate(geom: &FresnelGeometry, mask: &ZoneMask, count: usize, density: usize) -> Result<Complex64> {
    let open = mask.indices(count)?;
    let u = zone_contributions(geom, count, density)?;
    Ok(open.iter().map(|&n| u[n]).sum())
}

/// Least-squares exponent of `ρ_n ∝ n^p` over boundaries `n_lo..=n_hi`.
pub fn radius_exponent(geom: &FresnelGeometry, n_lo: usize, n_hi: usize) -> Result<f64> {
    if n_lo == 0 || n_hi <= n_lo {
        return Err(Error::invalid("exponent fit needs 1 <= n_lo < n_hi"));
    }
    let ns: Vec<f64> = (n_lo..=n_hi).map(|n| n as f64).collect();
    let rho: Vec<f64> = (n_lo..=n_hi).map(|n| boundary_radius(geom, n)).collect::<Result<_>>()?;
    loglog_slope(&ns, &rho).ok_or_else(|| Error::invalid("degenerate fit"))
}

/// Per-zone table: index, outer radius and contribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneRow {
    pub n: usize,
    pub rho: f64,
    #[serde(rename = "U_n")]
    pub u: ComplexReport,
}

pub fn zone_table(geom: &FresnelGeometry, count: usize, density: usize) -> Result<Vec<ZoneRow>> {
    let u = zone_contributions(geom, count, density)?;
    (0..count)
        .map(|n| {
            Ok(ZoneRow {
                n,
                rho: geom.r0 * zone_boundary_angle(geom, n + 1)?.sin(),
                u: u[n].into(),
            })
        })
        .collect()
}

/// CSV with header `n,rho,re_Un,im_Un,abs_Un,phase_Un`.
pub fn zone_table_csv(rows: &[ZoneRow]) -> String {
    let mut t = Table::new(&["n", "rho", "re_Un", "im_Un", "abs_Un", "phase_Un"]);
    for r in rows {
        t.push(vec![
            Cell::from(r.n),
            Cell::from(r.rho),
            Cell::from(r.u.re),
            Cell::from(r.u.im),
            Cell::from(r.u.abs),
            Cell::from(r.u.phase),
        ]);
    }
    t.to_csv()
}

/// The three evaluations of the on-axis field side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSummary {
    pub geometry: FresnelGeometry,
    pub zones: usize,
    #[serde(rename = "U_free")]
    pub u_free: ComplexReport,
    #[serde(rename = "U_integral")]
    pub u_integral: ComplexReport,
    #[serde(rename = "U_zone_sum_raw")]
    pub u_zone_sum_raw: ComplexReport,
    #[serde(rename = "U_zone_sum_averaged")]
    pub u_zone_sum_averaged: ComplexReport,
}

impl FieldSummary {
    /// Tapered integral and both zone sums over the first `count` zones.
    pub fn compute(geom: &FresnelGeometry, count: usize, density: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("summary needs at least one zone"));
        }
        let theta_max = zone_boundary_angle(geom, count)?;
        let sums = partial_sums(&zone_contributions(geom, count, density)?);
        let raw = sums[count - 1];
        let averaged = if count == 1 {
            0.5 * raw
        } else {
            0.5 * (sums[count - 1] + sums[count - 2])
        };
        Ok(FieldSummary {
            geometry: *geom,
            zones: count,
            u_free: geom.free_field().into(),
            u_integral: huygens_integral_tapered(geom, theta_max, density)?.into(),
            u_zone_sum_raw: raw.into(),
            u_zone_sum_averaged: averaged.into(),
        })
    }

    /// CSV with header `quantity,re,im,abs,phase`.
    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["quantity", "re", "im", "abs", "phase"]);
        for (name, z) in [
            ("U_free", self.u_free),
            ("U_integral", self.u_integral),
            ("U_zone_sum_raw", self.u_zone_sum_raw),
            ("U_zone_sum_averaged", self.u_zone_sum_averaged),
        ] {
            t.push(vec![
                Cell::from(name),
                Cell::from(z.re),
                Cell::from(z.im),
                Cell::from(z.abs),
                Cell::from(z.phase),
            ]);
        }
        t.to_csv()
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}
