//! The Wigner function evaluated two independent ways.
//!
//! * [`wigner_direct`] integrates the position-space density matrix,
//!   `W(x, p) = (1/2π) ∫ dy e^{-ipy} ρ(x + y/2, x - y/2)`.
//! * [`parity_sum`] sums displaced number statistics,
//!   `S(α) = 2 Σ (-1)^n P_n(-α)`, which equals `2π W` at the matching
//!   phase-space point.
//!
//! The identification between the displacement `α` and the phase-plane
//! point `(u, v)` is [`PHASE_CONVENTION`], chosen by [`convention_check`].
//!
//! Rotated quadratures come from the quadratic-phase (fractional Fourier)
//! integral transform of the wavefunction, and [`radon_slice`] takes the
//! matching line integrals through a sampled field.

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, hermite_functions_into, DensityMatrix, FockState, PhasePoint};
use crate::io::{fmt_float, to_json, Cell, Table};

/// `|W| ≤ 1/π` in dimensionless units.
pub const WIGNER_BOUND: f64 = FRAC_1_PI;

/// Largest acceptable magnitude of the last retained parity-sum term.
pub const PARITY_LAST_TERM_TOL: f64 = 1e-8;

/// Agreement required between `S(α)` and `2π W` for a convention to match.
pub const CONVENTION_TOL: f64 = 1e-6;

/// How a displacement amplitude `α` maps to a phase-plane point `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AlphaConvention {
    /// `α = u + i v`
    Plain,
    /// `α = (u + i v) / √2`
    Scaled,
}

impl AlphaConvention {
    pub const ALL: [AlphaConvention; 2] = [AlphaConvention::Plain, AlphaConvention::Scaled];

    pub fn displacement(self, point: PhasePoint) -> Complex64 {
        match self {
            AlphaConvention::Plain => point.alpha(),
            AlphaConvention::Scaled => point.alpha() * FRAC_1_SQRT_2,
        }
    }

    pub fn phase_point(self, alpha: Complex64) -> PhasePoint {
        let z = match self {
            AlphaConvention::Plain => alpha,
            AlphaConvention::Scaled => alpha * std::f64::consts::SQRT_2,
        };
        PhasePoint::new(z.re, z.im)
    }
}

/// The identification used throughout the crate. `convention_check` over
/// vacuum, number and coherent states singles out the scaled form; the
/// unscaled one fails by O(1) away from the origin.
pub const PHASE_CONVENTION: AlphaConvention = AlphaConvention::Scaled;

// ---------------------------------------------------------------------------
// Grids and fields
// ---------------------------------------------------------------------------

/// Rectangular sampling grid over the `(u, v)` plane, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_u: usize,
    pub n_v: usize,
}

impl PhaseGrid {
    pub fn new(u_min: f64, u_max: f64, n_u: usize, v_min: f64, v_max: f64, n_v: usize) -> Result<Self> {
        let finite = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite());
        if !finite || u_max <= u_min || v_max <= v_min {
            return Err(Error::invalid("grid bounds must be finite with max > min"));
        }
        if n_u < 2 || n_v < 2 {
            return Err(Error::invalid("grid needs at least two samples per axis"));
        }
        Ok(PhaseGrid {
            u_min,
            u_max,
            v_min,
            v_max,
            n_u,
            n_v,
        })
    }

    /// Same bounds and count on both axes.
    pub fn square(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(min, max, count, min, max, count)
    }

    pub fn du(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_u - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        (self.v_max - self.v_min) / (self.n_v - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u_min + (self.u_max - self.u_min) * i as f64 / (self.n_u - 1) as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_min + (self.v_max - self.v_min) * j as f64 / (self.n_v - 1) as f64
    }

    pub fn us(&self) -> Vec<f64> {
        (0..self.n_u).map(|i| self.u(i)).collect()
    }

    pub fn vs(&self) -> Vec<f64> {
        (0..self.n_v).map(|j| self.v(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Does the grid rectangle contain the disc of radius `r` at the origin?
    fn contains_disc(&self, r: f64) -> bool {
        self.u_min <= -r && self.u_max >= r && self.v_min <= -r && self.v_max >= r
    }
}

/// Wigner values sampled on a [`PhaseGrid`], stored row-major in `u`
/// (`values[i * n_v + j] = W(u_i, v_j)`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerField {
    grid: PhaseGrid,
    /// Whether the classical radius of the state's mean excitation (plus a
    /// margin) fits inside the grid. A `false` here is a warning only.
    contained: bool,
    values: Vec<f64>,
}

impl WignerField {
    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} values for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(WignerField {
            grid,
            contained: true,
            values,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contained(&self) -> bool {
        self.contained
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_v + j]
    }

    /// Double Riemann sum `Σ W Δu Δv`.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.du() * self.grid.dv()
    }

    /// Smallest value and where it sits.
    pub fn min(&self) -> (f64, PhasePoint) {
        self.extreme(|a, b| a < b)
    }

    pub fn max(&self) -> (f64, PhasePoint) {
        self.extreme(|a, b| a > b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> (f64, PhasePoint) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if better(v, self.values[best]) {
                best = k;
            }
        }
        let (i, j) = (best / self.grid.n_v, best % self.grid.n_v);
        (self.values[best], PhasePoint::new(self.grid.u(i), self.grid.v(j)))
    }

    /// Bilinear interpolation; `None` outside the grid rectangle.
    pub fn interpolate(&self, u: f64, v: f64) -> Option<f64> {
        let g = &self.grid;
        if !(u >= g.u_min && u <= g.u_max && v >= g.v_min && v <= g.v_max) {
            return None;
        }
        let fu = (u - g.u_min) / g.du();
        let fv = (v - g.v_min) / g.dv();
        let i = (fu.floor() as usize).min(g.n_u - 2);
        let j = (fv.floor() as usize).min(g.n_v - 2);
        let s = fu - i as f64;
        let t = fv - j as f64;
        let w00 = self.get(i, j);
        let w10 = self.get(i + 1, j);
        let w01 = self.get(i, j + 1);
        let w11 = self.get(i + 1, j + 1);
        Some((1.0 - s) * (1.0 - t) * w00 + s * (1.0 - t) * w10 + (1.0 - s) * t * w01 + s * t * w11)
    }

    pub fn max_abs_deviation(&self, other: &WignerField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with header `u,v,w`, row-major node order.
    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["u", "v", "w"]);
        for i in 0..self.grid.n_u {
            for j in 0..self.grid.n_v {
                t.push(vec![
                    Cell::from(self.grid.u(i)),
                    Cell::from(self.grid.v(j)),
                    Cell::from(self.get(i, j)),
                ]);
            }
        }
        t.to_csv()
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Classical radius of the mean excitation plus four units, beyond which a
/// Gaussian-tailed field has dropped below ~1e-7.
fn containment_radius(rho: &DensityMatrix) -> f64 {
    let e = rho.entries();
    let mean: f64 = (0..e.nrows()).map(|n| n as f64 * e[(n, n)].re).sum();
    (2.0 * mean + 1.0).sqrt() + 4.0
}

// ---------------------------------------------------------------------------
// Direct integral
// ---------------------------------------------------------------------------

/// Controls for the trapezoid-halving quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative change between successive halvings that ends refinement.
    pub tolerance: f64,
    pub max_halvings: usize,
    /// Multiplies the bandwidth-derived starting step.
    pub step_scale: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tolerance: 1e-10,
            max_halvings: 14,
            step_scale: 1.0,
        }
    }
}

/// Position-space view of a density matrix: `ρ(x', x'') = Σ λ φ(x') φ*(x'')`.
struct PositionKernel {
    components: Vec<(f64, Vec<Complex64>)>,
    n: usize,
    /// Beyond this |x| every occupied eigenfunction is below ~1e-17.
    x_max: f64,
    /// Rough upper bound on the local wavenumber of the integrand.
    bandwidth: f64,
}

impl PositionKernel {
    fn new(rho: &DensityMatrix) -> Self {
        let n = rho.support();
        let components = rho
            .components()
            .iter()
            .map(|(l, v)| (*l, v.iter().take(n + 1).copied().collect()))
            .collect();
        let turning = (2.0 * n as f64 + 1.0).sqrt();
        PositionKernel {
            components,
            n,
            x_max: turning + 9.0,
            bandwidth: turning + 4.0,
        }
    }

    fn correlation(&self, x1: f64, x2: f64, b1: &mut [f64], b2: &mut [f64]) -> Complex64 {
        hermite_functions_into(x1, b1);
        hermite_functions_into(x2, b2);
        let mut g = Complex64::new(0.0, 0.0);
        for (lambda, c) in &self.components {
            let mut a = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for k in 0..=self.n {
                a += c[k] * b1[k];
                b += c[k] * b2[k];
            }
            g += a * b.conj() * *lambda;
        }
        g
    }

    /// `W(x, p)` for every `p` in `ps`.
    ///
    /// The integrand `f(y) = Re(e^{-ipy} ρ(x+y/2, x-y/2))` is even in `y`,
    /// so the trapezoid rule on `[0, Y]` with half weight at the origin is
    /// the folded symmetric rule and keeps its geometric convergence.
    fn column(&self, x: f64, ps: &[f64], opts: &QuadratureOptions) -> Result<Vec<f64>> {
        let y_max = 2.0 * (self.x_max - x.abs());
        if y_max <= 0.0 || ps.is_empty() {
            return Ok(vec![0.0; ps.len()]);
        }
        let p_max = ps.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
        let h_guess = (PI / (p_max + self.bandwidth)).min(y_max / 4.0) * opts.step_scale;
        let m0 = (y_max / h_guess).ceil().max(4.0) as usize;
        let mut h = y_max / m0 as f64;

        let mut b1 = vec![0.0; self.n + 1];
        let mut b2 = vec![0.0; self.n + 1];
        let mut samples = Vec::with_capacity(m0 + 1);

        // level 0: nodes j h, j = 0..=m0, half weight at the ends
        for j in 0..=m0 {
            let y = j as f64 * h;
            let w = if j == 0 || j == m0 { 0.5 } else { 1.0 };
            samples.push(self.correlation(x + 0.5 * y, x - 0.5 * y, &mut b1, &mut b2) * w);
        }
        let mut sums: Vec<f64> = ps.iter().map(|&p| accumulate(&samples, p, 0.0, h)).collect();
        let mut prev: Vec<f64> = sums.iter().map(|s| s * h * FRAC_1_PI).collect();

        let mut new_nodes = m0;
        for _ in 0..opts.max_halvings {
            h *= 0.5;
            samples.clear();
            for j in 0..new_nodes {
                let y = (2 * j + 1) as f64 * h;
                samples.push(self.correlation(x + 0.5 * y, x - 0.5 * y, &mut b1, &mut b2));
            }
            for (s, &p) in sums.iter_mut().zip(ps) {
                *s += accumulate(&samples, p, h, 2.0 * h);
            }
            let est: Vec<f64> = sums.iter().map(|s| s * h * FRAC_1_PI).collect();
            let settled = est
                .iter()
                .zip(&prev)
                .all(|(a, b)| (a - b).abs() <= opts.tolerance * a.abs().max(WIGNER_BOUND));
            if settled {
                return Ok(est);
            }
            prev = est;
            new_nodes *= 2;
        }
        let worst = ps[0];
        Err(Error::NonConvergence {
            what: "Wigner y-quadrature",
            detail: format!("node (u = {x}, v = {worst}) after {} halvings", opts.max_halvings),
        })
    }
}

/// `Σ_j Re(e^{-ip y_j} g_j)` for `y_j = y0 + j step`, with the phase
/// advanced by rotation and resynchronised every 64 steps.
fn accumulate(g: &[Complex64], p: f64, y0: f64, step: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -p * step);
    let mut acc = 0.0;
    let mut phase = Complex64::from_polar(1.0, -p * y0);
    for (j, gj) in g.iter().enumerate() {
        if j % 64 == 0 {
            phase = Complex64::from_polar(1.0, -p * (y0 + j as f64 * step));
        }
        acc += (phase * gj).re;
        phase *= rot;
    }
    acc
}

/// `W` on `grid` by direct quadrature of the Fourier integral.
pub fn wigner_direct(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<WignerField> {
    wigner_direct_with(rho, grid, &QuadratureOptions::default())
}

pub fn wigner_direct_with(rho: &DensityMatrix, grid: &PhaseGrid, opts: &QuadratureOptions) -> Result<WignerField> {
    let kernel = PositionKernel::new(rho);
    let vs = grid.vs();
    let columns: Vec<Result<Vec<f64>>> = (0..grid.n_u)
        .into_par_iter()
        .map(|i| kernel.column(grid.u(i), &vs, opts))
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for c in columns {
        values.extend(c?);
    }
    Ok(WignerField {
        grid: *grid,
        contained: grid.contains_disc(containment_radius(rho)),
        values,
    })
}

/// `W(u, v)` at a single point by direct quadrature.
pub fn wigner_at(rho: &DensityMatrix, point: PhasePoint) -> Result<f64> {
    wigner_at_with(rho, point, &QuadratureOptions::default())
}

pub fn wigner_at_with(rho: &DensityMatrix, point: PhasePoint, opts: &QuadratureOptions) -> Result<f64> {
    PositionKernel::new(rho).column(point.u, &[point.v], opts).map(|v| v[0])
}

// ---------------------------------------------------------------------------
// Alternating parity sum
// ---------------------------------------------------------------------------

/// Result of [`parity_sum`] with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParitySum {
    /// `2 Σ_{n ≤ N} (-1)^n P_n(-α)`
    pub value: f64,
    /// `2 P_N(-α)`, the magnitude of the last retained term.
    pub last_term: f64,
    /// `Tr ρ - Σ P_n`, mass displaced beyond the cutoff.
    pub tail_mass: f64,
    pub n_max: usize,
}

/// Cutoff used when none is given: the default displaced-state truncation.
pub fn parity_truncation(rho: &DensityMatrix, alpha: Complex64) -> usize {
    fock::displaced_truncation(rho, -alpha)
}

/// `S(α) = 2 Σ_{n=0}^{N} (-1)^n P_n(-α)`, summed directly.
///
/// Fails with a non-convergence error when the last retained term exceeds
/// [`PARITY_LAST_TERM_TOL`].
pub fn parity_sum(rho: &DensityMatrix, alpha: Complex64, n_max: usize) -> Result<ParitySum> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::invalid("non-finite displacement"));
    }
    let mut p = fock::displaced_diagonal(rho, -alpha, n_max);
    fock::clamp_probabilities(&mut p)?;
    let value = 2.0
        * p.iter()
            .enumerate()
            .map(|(n, pn)| if n % 2 == 0 { *pn } else { -pn })
            .sum::<f64>();
    let last_term = 2.0 * p[n_max];
    let tail_mass = rho.trace() - p.iter().sum::<f64>();
    if last_term > PARITY_LAST_TERM_TOL {
        return Err(Error::NonConvergence {
            what: "parity sum",
            detail: format!("last term {last_term:.3e} at N = {n_max} exceeds {PARITY_LAST_TERM_TOL:.0e}; increase N"),
        });
    }
    Ok(ParitySum {
        value,
        last_term,
        tail_mass,
        n_max,
    })
}

/// Parity sum at a phase-plane point under [`PHASE_CONVENTION`], default
/// cutoff.
pub fn parity_sum_at(rho: &DensityMatrix, point: PhasePoint) -> Result<ParitySum> {
    let alpha = PHASE_CONVENTION.displacement(point);
    parity_sum(rho, alpha, parity_truncation(rho, alpha))
}

/// `S / 2π` on a grid, directly comparable to [`wigner_direct`].
pub fn wigner_parity(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<WignerField> {
    let nodes: Vec<(usize, usize)> = (0..grid.n_u).flat_map(|i| (0..grid.n_v).map(move |j| (i, j))).collect();
    let values: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|&(i, j)| parity_sum_at(rho, PhasePoint::new(grid.u(i), grid.v(j))).map(|s| s.value / (2.0 * PI)))
        .collect();
    Ok(WignerField {
        grid: *grid,
        contained: grid.contains_disc(containment_radius(rho)),
        values: values?,
    })
}

/// Outcome of [`convention_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionReport {
    pub points: usize,
    pub plain_max_deviation: f64,
    pub scaled_max_deviation: f64,
    /// Conventions whose worst deviation is below [`CONVENTION_TOL`].
    pub matching: Vec<AlphaConvention>,
    /// Set when exactly one convention matches.
    pub winner: Option<AlphaConvention>,
}

/// Evaluates the parity sum under both candidate `α ↔ (u, v)`
/// identifications against `2π W` from the direct integral.
///
/// Neither matching means one of the two evaluation routes is broken and
/// is reported as [`Error::Inconsistent`]. Both matching (e.g. only the
/// origin sampled) leaves `winner` unset.
pub fn convention_check(rho: &DensityMatrix, points: &[PhasePoint]) -> Result<ConventionReport> {
    if points.is_empty() {
        return Err(Error::invalid("convention check needs at least one point"));
    }
    let mut worst = [0.0_f64; 2];
    for &pt in points {
        let w = wigner_at(rho, pt)?;
        for (k, conv) in AlphaConvention::ALL.iter().enumerate() {
            let alpha = conv.displacement(pt);
            let s = parity_sum(rho, alpha, parity_truncation(rho, alpha))?;
            worst[k] = worst[k].max((s.value - 2.0 * PI * w).abs());
        }
    }
    let matching: Vec<AlphaConvention> = AlphaConvention::ALL
        .iter()
        .zip(worst)
        .filter(|(_, d)| *d < CONVENTION_TOL)
        .map(|(c, _)| *c)
        .collect();
    if matching.is_empty() {
        return Err(Error::Inconsistent(format!(
            "no α ↔ (u, v) convention reproduces the direct integral (deviations {} / {})",
            fmt_float(worst[0]),
            fmt_float(worst[1])
        )));
    }
    let winner = if matching.len() == 1 { Some(matching[0]) } else { None };
    Ok(ConventionReport {
        points: points.len(),
        plain_max_deviation: worst[0],
        scaled_max_deviation: worst[1],
        matching,
        winner,
    })
}

/// `Tr(ρ₁ ρ₂) = 2π ∫∫ W₁ W₂ du dv`, by double Riemann sum.
pub fn overlap_trace(w1: &WignerField, w2: &WignerField) -> Result<f64> {
    if w1.grid != w2.grid {
        return Err(Error::GridMismatch);
    }
    let s: f64 = w1.values.iter().zip(&w2.values).map(|(a, b)| a * b).sum();
    Ok(2.0 * PI * s * w1.grid.du() * w1.grid.dv())
}

// ---------------------------------------------------------------------------
// Rotated quadratures
// ---------------------------------------------------------------------------

const KERNEL_TOL: f64 = 1e-10;
const KERNEL_MAX_LEVELS: usize = 12;

/// A function sampled lazily on nested trapezoid grids over `[-y_max, y_max]`:
/// level 0 holds every node at spacing `h0`, level `l ≥ 1` the new
/// midpoints at spacing `h0 / 2^l`.
struct DyadicSamples<F> {
    y_max: f64,
    h0: f64,
    m0: usize,
    levels: Vec<Vec<Complex64>>,
    f: F,
}

impl<F: FnMut(f64) -> Result<Complex64>> DyadicSamples<F> {
    fn new(y_max: f64, h_guess: f64, f: F) -> Self {
        let m0 = (2.0 * y_max / h_guess).ceil().max(8.0) as usize;
        DyadicSamples {
            y_max,
            h0: 2.0 * y_max / m0 as f64,
            m0,
            levels: Vec::new(),
            f,
        }
    }

    fn step(&self, level: usize) -> f64 {
        self.h0 / (1u64 << level) as f64
    }

    fn node(&self, level: usize, j: usize) -> f64 {
        if level == 0 {
            -self.y_max + j as f64 * self.h0
        } else {
            -self.y_max + (2 * j + 1) as f64 * self.step(level)
        }
    }

    fn count(&self, level: usize) -> usize {
        if level == 0 {
            self.m0 + 1
        } else {
            self.m0 << (level - 1)
        }
    }

    fn ensure(&mut self, level: usize) -> Result<()> {
        while self.levels.len() <= level {
            let l = self.levels.len();
            let mut vals = Vec::with_capacity(self.count(l));
            for j in 0..self.count(l) {
                let y = self.node(l, j);
                vals.push((self.f)(y)?);
            }
            self.levels.push(vals);
        }
        Ok(())
    }
}

/// Quadratic-phase transform of order `theta` evaluated at `x`:
///
/// ```text
/// F_θ[f](x) = sqrt((1 - i cot θ) / 2π) ∫ dy exp(i (cot θ / 2)(x² + y²) - i x y / sin θ) f(y)
/// ```
///
/// Needs `|sin θ|` bounded away from zero; callers split small orders.
fn kernel_transform<F>(samples: &mut DyadicSamples<F>, theta: f64, x: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let (s, c) = theta.sin_cos();
    let cot = c / s;
    let csc = 1.0 / s;
    let amp = (Complex64::new(1.0, -cot) / (2.0 * PI)).sqrt();
    let kern = |y: f64| Complex64::from_polar(1.0, 0.5 * cot * (x * x + y * y) - x * y * csc);

    samples.ensure(0)?;
    let m0 = samples.m0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, fj) in samples.levels[0].iter().enumerate() {
        let w = if j == 0 || j == m0 { 0.5 } else { 1.0 };
        sum += kern(samples.node(0, j)) * fj * w;
    }
    let mut prev = amp * sum * samples.h0;
    for level in 1..=KERNEL_MAX_LEVELS {
        samples.ensure(level)?;
        for (j, fj) in samples.levels[level].iter().enumerate() {
            sum += kern(samples.node(level, j)) * fj;
        }
        let est = amp * sum * samples.step(level);
        if (est - prev).norm() <= KERNEL_TOL * est.norm().max(1e-2) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NonConvergence {
        what: "rotation-kernel quadrature",
        detail: format!("x = {x}, θ = {theta}"),
    })
}

/// Density of the rotated quadrature `u cos θ + v sin θ` for a pure
/// state, by applying the order-`θ` quadratic-phase transform to the
/// position wavefunction. `θ = 0` is the identity and `θ = π/2` the
/// ordinary Fourier transform.
///
/// Orders with `|sin θ| < 1/2` are composed as `F_{θ-π/2} ∘ F_{π/2}` so
/// that neither kernel becomes a near-delta chirp.
pub fn rotated_quadrature(psi: &FockState, theta: f64, xs: &[f64]) -> Result<Vec<f64>> {
    if !theta.is_finite() || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite angle or sample point"));
    }
    let n = psi.amplitudes().iter().rposition(|c| c.norm_sqr() > 1e-32).unwrap_or(0);
    let turning = (2.0 * n as f64 + 1.0).sqrt();
    let y_max = turning + 9.0;
    let bandwidth = turning + 4.0;
    let mut table = vec![0.0; n + 1];
    let amps = &psi.amplitudes()[..=n];
    let wavefunction = move |y: f64| -> Result<Complex64> {
        hermite_functions_into(y, &mut table);
        Ok(amps.iter().zip(&table).map(|(c, p)| c * *p).sum())
    };

    if theta.rem_euclid(2.0 * PI) == 0.0 {
        let mut f = wavefunction;
        return xs.iter().map(|&x| f(x).map(|z| z.norm_sqr())).collect();
    }

    let x_abs = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let spread = |order: f64| {
        let (s, c) = order.sin_cos();
        bandwidth + (c / s).abs() * y_max + x_abs / s.abs()
    };

    if theta.sin().abs() >= 0.5 {
        let mut samples = DyadicSamples::new(y_max, PI / spread(theta), wavefunction);
        xs.iter()
            .map(|&x| kernel_transform(&mut samples, theta, x).map(|z| z.norm_sqr()))
            .collect()
    } else {
        let mut inner = DyadicSamples::new(y_max, PI / (bandwidth + y_max), wavefunction);
        let fourier = move |z: f64| kernel_transform(&mut inner, FRAC_PI_2, z);
        let outer_order = theta - FRAC_PI_2;
        let mut outer = DyadicSamples::new(y_max, PI / spread(outer_order), fourier);
        xs.iter()
            .map(|&x| kernel_transform(&mut outer, outer_order, x).map(|z| z.norm_sqr()))
            .collect()
    }
}

/// Threshold on `|W|` where a line leaves the grid.
pub const RADON_EDGE_TOL: f64 = 1e-6;

/// Marginal of `W` along `x = u cos θ + v sin θ`: line integrals over the
/// perpendicular direction, sampled at half the smaller grid spacing with
/// bilinear interpolation between nodes.
pub fn radon_slice(w: &WignerField, theta: f64, xs: &[f64]) -> Result<Vec<f64>> {
    if !theta.is_finite() {
        return Err(Error::invalid("non-finite angle"));
    }
    let g = w.grid;
    let (s, c) = theta.sin_cos();
    let step = 0.5 * g.du().min(g.dv());
    xs.iter()
        .map(|&x| {
            let (u0, v0) = (x * c, x * s);
            // u(t) = u0 - t sin θ, v(t) = v0 + t cos θ
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (start, dir, a, b) in [(u0, -s, g.u_min, g.u_max), (v0, c, g.v_min, g.v_max)] {
                if dir.abs() < 1e-15 {
                    if start < a || start > b {
                        return Ok(0.0);
                    }
                } else {
                    let t1 = (a - start) / dir;
                    let t2 = (b - start) / dir;
                    lo = lo.max(t1.min(t2));
                    hi = hi.min(t1.max(t2));
                }
            }
            if !(hi > lo) {
                return Ok(0.0);
            }
            let m = ((hi - lo) / step).ceil().max(1.0) as usize;
            let h = (hi - lo) / m as f64;
            let at = |t: f64| {
                let u = (u0 - t * s).clamp(g.u_min, g.u_max);
                let v = (v0 + t * c).clamp(g.v_min, g.v_max);
                w.interpolate(u, v).unwrap_or(0.0)
            };
            let (first, last) = (at(lo), at(hi));
            if first.abs() > RADON_EDGE_TOL || last.abs() > RADON_EDGE_TOL {
                return Err(Error::Containment(format!(
                    "line x = {x}, θ = {theta} leaves the grid where |W| = {:.3e}",
                    first.abs().max(last.abs())
                )));
            }
            let mut acc = 0.5 * (first + last);
            for k in 1..m {
                acc += at(lo + k as f64 * h);
            }
            Ok(acc * h)
        })
        .collect()
}
