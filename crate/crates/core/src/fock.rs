//! Truncated Fock-space numerics for the harmonic oscillator.
//!
//! Units are `ħ = 1` and `κ = 1` throughout: positions and momenta are the
//! dimensionless `(u, v)` of the phase plane. [`PhasePoint::from_physical`]
//! is the only place physical units enter.
//!
//! Displacement matrix elements use the associated-Laguerre closed form
//!
//! ```text
//! ⟨m|D(α)|n⟩ = sqrt(n!/m!) α^(m-n) e^(-|α|²/2) L_n^(m-n)(|α|²),   m ≥ n
//! ```
//!
//! with the factorial ratio folded into a rescaled Laguerre recurrence so
//! that nothing overflows for large indices.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ln_factorial;

/// Tolerated probability mass lost to Fock-space truncation.
pub const EPS_TAIL: f64 = 1e-10;

/// Largest Fock index accepted by [`oscillator_eigenfunction`].
pub const MAX_EIGENFUNCTION_INDEX: usize = 10_000;

/// Diagonal entries in `[-NEGATIVE_CLAMP, 0)` are roundoff and get clamped.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Weights below this are ignored when sizing the occupied Fock support.
const SUPPORT_CUTOFF: f64 = 1e-32;

/// Hermitian check tolerance, elementwise.
const HERMITIAN_TOL: f64 = 1e-12;

/// Smallest eigenvalue accepted as positive semidefinite up to roundoff.
const PSD_TOL: f64 = -1e-10;

/// Default Fock cutoff for a state of characteristic amplitude `beta_mag`
/// displaced by `alpha_mag`: `max(64, ceil(4 (|α| + |β|)² + 20))`.
pub fn default_truncation(alpha_mag: f64, beta_mag: f64) -> usize {
    let r = alpha_mag.abs() + beta_mag.abs();
    (4.0 * r * r + 20.0).ceil().max(64.0) as usize
}

/// A point of the dimensionless phase plane, `u = κx`, `v = p/(ħκ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
}

impl PhasePoint {
    pub fn new(u: f64, v: f64) -> Self {
        PhasePoint { u, v }
    }

    /// Converts physical position and momentum given the oscillator length
    /// scale `kappa` (inverse length) and `hbar`.
    pub fn from_physical(x: f64, p: f64, kappa: f64, hbar: f64) -> Self {
        PhasePoint {
            u: kappa * x,
            v: p / (hbar * kappa),
        }
    }

    /// `α = u + i v`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }
}

// ---------------------------------------------------------------------------
// Oscillator eigenfunctions
// ---------------------------------------------------------------------------

/// `ψ_n(x)` sampled at `xs`, via the normalised Hermite-function recurrence
///
/// ```text
/// ψ_{n+1}(x) = sqrt(2/(n+1)) x ψ_n(x) - sqrt(n/(n+1)) ψ_{n-1}(x)
/// ```
///
/// Values are computed at `|x|` and the parity sign applied afterwards, so
/// `ψ_n(-x) = (-1)^n ψ_n(x)` holds bit for bit.
pub fn oscillator_eigenfunction(n: usize, xs: &[f64]) -> Result<Vec<f64>> {
    if n > MAX_EIGENFUNCTION_INDEX {
        return Err(Error::OutOfRange {
            what: "eigenfunction",
            index: n,
            max: MAX_EIGENFUNCTION_INDEX,
        });
    }
    let mut buf = vec![0.0; n + 1];
    xs.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(Error::invalid(format!("non-finite sample point {x}")));
            }
            hermite_functions_into(x, &mut buf);
            Ok(buf[n])
        })
        .collect()
}

/// Fills `out[k] = ψ_k(x)` for `k = 0..out.len()`.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let ax = x.abs();
    if ax < 35.0 {
        // ψ_0 stays a normal float here and |ψ_k| ≤ 1, so no scaling needed.
        let mut prev = 0.0;
        let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * ax * ax).exp();
        out[0] = cur;
        for k in 1..out.len() {
            let kf = k as f64;
            let next = (2.0 / kf).sqrt() * ax * cur - ((kf - 1.0) / kf).sqrt() * prev;
            prev = cur;
            cur = next;
            out[k] = cur;
        }
    } else {
        hermite_functions_scaled(ax, out);
    }
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

/// Log-scaled variant of the recurrence for large `|x|`, where `ψ_0`
/// underflows long before the high-order functions do.
fn hermite_functions_scaled(ax: f64, out: &mut [f64]) {
    const BIG: f64 = 1e150;
    let ln_big = BIG.ln();
    let mut log_scale = -0.5 * ax * ax - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0_f64;
    let emit = |v: f64, log_scale: f64| -> f64 {
        if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + log_scale).exp()
        }
    };
    out[0] = emit(cur, log_scale);
    for k in 1..out.len() {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * ax * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += ln_big;
        }
        out[k] = emit(cur, log_scale);
    }
}

/// `ψ_0..=ψ_{n_max}` at a single point.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    hermite_functions_into(x, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// Pure state as Fock amplitudes `c_0..=c_{N_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
}

impl FockState {
    /// Wraps amplitudes whose squared norm is within [`EPS_TAIL`] of one.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("a Fock state needs at least one amplitude"));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite Fock amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > EPS_TAIL {
            return Err(Error::TailMass {
                mass: (1.0 - norm).abs(),
                tolerance: EPS_TAIL,
            });
        }
        Ok(FockState { amplitudes })
    }

    /// Number state `|n⟩` embedded in a space of cutoff `n_max`.
    pub fn number(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::OutOfRange {
                what: "Fock",
                index: n,
                max: n_max,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(FockState { amplitudes })
    }

    pub fn vacuum() -> Self {
        FockState {
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Coherent state `|β⟩ = D(β)|0⟩`; see [`coherent_amplitudes`].
    pub fn coherent(beta: Complex64, n_max: usize) -> Result<Self> {
        coherent_amplitudes(beta, n_max)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Position-representation wavefunction `Σ c_k ψ_k(x)`.
    pub fn wavefunction(&self, x: f64) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(hermite_functions(self.n_max(), x))
            .map(|(c, p)| c * p)
            .sum()
    }
}

/// Probability mass of a Poisson distribution of mean `mean` above `n_max`.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let p = (-mean + n as f64 * ln_mean - ln_factorial(n)).exp();
        tail += p;
        if (n as f64 > mean && (p < 1e-300 || p < tail * 1e-18)) || n > n_max + 100_000 {
            break;
        }
        n += 1;
    }
    tail
}

/// Fock amplitudes of the coherent state `|β⟩`,
/// `c_n = e^(-|β|²/2) β^n / sqrt(n!)`, evaluated through log-factorials.
///
/// Fails when the Poisson mass beyond `n_max` exceeds [`EPS_TAIL`].
pub fn coherent_amplitudes(beta: Complex64, n_max: usize) -> Result<FockState> {
    if !beta.re.is_finite() || !beta.im.is_finite() {
        return Err(Error::invalid("non-finite coherent amplitude"));
    }
    let mean = beta.norm_sqr();
    let tail = poisson_tail(mean, n_max);
    if tail > EPS_TAIL {
        return Err(Error::TailMass {
            mass: tail,
            tolerance: EPS_TAIL,
        });
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max + 1];
    amplitudes[0] = Complex64::new((-0.5 * mean).exp(), 0.0);
    if mean > 0.0 {
        let ln_mag = beta.norm().ln();
        let phase = beta.arg();
        for (n, c) in amplitudes.iter_mut().enumerate().skip(1) {
            let nf = n as f64;
            let mag = (-0.5 * mean + nf * ln_mag - 0.5 * ln_factorial(n)).exp();
            *c = Complex64::from_polar(mag, nf * phase);
        }
    }
    Ok(FockState { amplitudes })
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// Density operator in a truncated Fock basis.
///
/// Keeps a spectral factorisation `ρ = Σ λ_r |v_r⟩⟨v_r|` next to the
/// entries; the phase-space routines work on the factors.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    components: Vec<(f64, DVector<Complex64>)>,
    support: usize,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The QR iteration underflows to NaN on entries far below the matrix
/// scale (displaced states carry elements down to 1e-250), so those are
/// flushed to zero first, progressively more aggressively if needed.
fn hermitian_eigen(herm: &DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, Dyn>> {
    let scale = herm.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    for rel in [1e-60, 1e-40, 1e-25] {
        let floor = rel * scale;
        let flushed = herm.map(|z| if z.norm() < floor { Complex64::new(0.0, 0.0) } else { z });
        let eig = flushed.symmetric_eigen();
        if eig.eigenvalues.iter().all(|l| l.is_finite()) {
            return Ok(eig);
        }
    }
    Err(Error::NonConvergence {
        what: "Hermitian eigendecomposition",
        detail: format!("{}x{} density matrix", herm.nrows(), herm.ncols()),
    })
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace within [`EPS_TAIL`] and positive
    /// semidefiniteness up to roundoff.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || !entries.is_square() {
            return Err(Error::invalid("density matrix must be square and non-empty"));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite density-matrix entry"));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..=i {
                let d = entries[(i, j)] - entries[(j, i)].conj();
                if d.norm() > HERMITIAN_TOL {
                    return Err(Error::invalid(format!(
                        "density matrix not Hermitian at ({i}, {j}): deviation {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| entries[(i, i)].re).sum();
        if (trace - 1.0).abs() > EPS_TAIL {
            return Err(Error::TailMass {
                mass: (1.0 - trace).abs(),
                tolerance: EPS_TAIL,
            });
        }
        let dm = Self::from_hermitian(entries)?;
        if let Some(min) = dm.components.iter().map(|c| c.0).reduce(f64::min) {
            if min < PSD_TOL {
                return Err(Error::invalid(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(dm)
    }

    /// Hermitises and factorises without the trace and positivity checks.
    pub(crate) fn from_hermitian(entries: DMatrix<Complex64>) -> Result<Self> {
        let herm = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = hermitian_eigen(&herm)?;
        let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut components: Vec<(f64, DVector<Complex64>)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .filter(|(l, _)| l.abs() > 1e-15 * scale.max(1e-300))
            .map(|(l, v)| (*l, v.into_owned()))
            .collect();
        components.sort_by(|a, b| b.0.total_cmp(&a.0));
        let support = support_of(&components);
        Ok(DensityMatrix {
            entries: herm,
            components,
            support,
        })
    }

    pub fn from_pure(state: &FockState) -> Self {
        let v = DVector::from_column_slice(state.amplitudes());
        let norm = state.norm_sqr();
        let entries = &v * v.adjoint();
        let unit = &v / Complex64::new(norm.sqrt(), 0.0);
        let components = vec![(norm, unit)];
        let support = support_of(&components);
        DensityMatrix {
            entries,
            components,
            support,
        }
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be positive and are
    /// normalised to sum to one. Smaller matrices are zero-padded.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("empty mixture"));
        }
        if parts.iter().any(|(w, _)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("mixture weights must be positive"));
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let dim = parts.iter().map(|p| p.1.dim()).max().unwrap_or(1);
        let mut entries = DMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            let d = rho.dim();
            let mut view = entries.view_mut((0, 0), (d, d));
            view += rho.entries() * Complex64::new(w / total, 0.0);
        }
        DensityMatrix::new(entries)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Highest Fock index carrying non-negligible weight.
    pub fn support(&self) -> usize {
        self.support
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.0).collect()
    }

    /// Spectral factors `(λ_r, v_r)`, largest weight first.
    pub(crate) fn components(&self) -> &[(f64, DVector<Complex64>)] {
        &self.components
    }

    /// Characteristic phase-space radius of the occupied Fock support,
    /// used to size truncations: `sqrt(support)`.
    pub(crate) fn amplitude_scale(&self) -> f64 {
        (self.support as f64).sqrt()
    }

    /// `Tr(ρ₁ ρ₂)` over the common block.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim().min(other.dim());
        let a = self.entries.view((0, 0), (d, d));
        let b = other.entries.view((0, 0), (d, d));
        (a * b).trace().re
    }
}

fn support_of(components: &[(f64, DVector<Complex64>)]) -> usize {
    let mut support = 0;
    for (l, v) in components {
        for (n, c) in v.iter().enumerate() {
            if l.abs() * c.norm_sqr() > SUPPORT_CUTOFF {
                support = support.max(n);
            }
        }
    }
    support
}

// ---------------------------------------------------------------------------
// Displacement
// ---------------------------------------------------------------------------

/// Block `⟨m|D(α)|n⟩` for `m < rows`, `n < cols`.
///
/// Every entry is exact; truncation only decides which rows are kept.
pub fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return out;
    }
    if alpha == Complex64::new(0.0, 0.0) {
        for i in 0..rows.min(cols) {
            out[(i, i)] = Complex64::new(1.0, 0.0);
        }
        return out;
    }
    let x = alpha.norm_sqr();
    let ln_x = x.ln();
    let phase = alpha.arg();
    let mut scaled = Vec::new();
    for k in 0..rows.max(cols) {
        // lower diagonal (j + k, j) needs j < cols, j + k < rows
        let lower = if k < rows { (cols).min(rows - k) } else { 0 };
        // upper diagonal (j, j + k) needs j < rows, j + k < cols
        let upper = if k >= 1 && k < cols { rows.min(cols - k) } else { 0 };
        let len = lower.max(upper);
        if len == 0 {
            continue;
        }
        scaled_laguerre_diagonal(x, ln_x, k, len, &mut scaled);
        let lower_phase = Complex64::from_polar(1.0, k as f64 * phase);
        for (j, r) in scaled.iter().take(lower).enumerate() {
            out[(j + k, j)] = lower_phase * *r;
        }
        if upper > 0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let upper_phase = Complex64::from_polar(sign, -(k as f64) * phase);
            for (j, r) in scaled.iter().take(upper).enumerate() {
                out[(j, j + k)] = upper_phase * *r;
            }
        }
    }
    out
}

/// Real magnitudes `e^(-x/2) x^(k/2) sqrt(j!/(j+k)!) L_j^(k)(x)` for
/// `j = 0..len`, via the Laguerre recurrence rescaled by the factorial
/// ratio so that intermediate values stay bounded.
fn scaled_laguerre_diagonal(x: f64, ln_x: f64, k: usize, len: usize, out: &mut Vec<f64>) {
    const BIG: f64 = 1e150;
    out.clear();
    let kf = k as f64;
    let ln_pref = -0.5 * x + 0.5 * kf * ln_x - 0.5 * ln_factorial(k);
    let pref = ln_pref.exp();
    let mut log_scale = 0.0_f64;
    let emit = |l: f64, log_scale: f64| -> f64 {
        if log_scale == 0.0 && pref > 1e-250 {
            pref * l
        } else if l == 0.0 {
            0.0
        } else {
            l.signum() * (l.abs().ln() + log_scale + ln_pref).exp()
        }
    };
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out.push(emit(cur, log_scale));
    for j in 0..len.saturating_sub(1) {
        let jf = j as f64;
        let next =
            ((2.0 * jf + 1.0 + kf - x) * cur - (jf * (jf + kf)).sqrt() * prev) / ((jf + 1.0) * (jf + 1.0 + kf)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
        }
        out.push(emit(cur, log_scale));
    }
}

/// `1 - ‖column‖²` for each column of a truncated operator.
pub fn column_leakage(matrix: &DMatrix<Complex64>) -> Vec<f64> {
    matrix
        .column_iter()
        .map(|c| 1.0 - c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect()
}

/// Square truncation of `D(α)` with cutoff `n_max`.
///
/// Columns `n` whose displaced content the default truncation rule says
/// fits inside `n_max` (always including the displaced vacuum, column 0)
/// must leak less than [`EPS_TAIL`]; otherwise the worst such column is
/// reported.
pub fn displacement_matrix(alpha: Complex64, n_max: usize) -> Result<DMatrix<Complex64>> {
    check_alpha(alpha)?;
    let d = displacement_block(alpha, n_max + 1, n_max + 1);
    let a = alpha.norm();
    let guarded = (0..=n_max)
        .take_while(|&n| {
            let r = a + (n as f64).sqrt();
            n == 0 || 4.0 * r * r + 20.0 <= n_max as f64
        })
        .count();
    let leak = column_leakage(&d);
    if let Some((column, &leakage)) = leak.iter().take(guarded).enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        if leakage > EPS_TAIL {
            return Err(Error::Leakage {
                column,
                leakage,
                tolerance: EPS_TAIL,
            });
        }
    }
    Ok(d)
}

fn check_alpha(alpha: Complex64) -> Result<()> {
    if alpha.re.is_finite() && alpha.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("non-finite displacement"))
    }
}

/// Output cutoff used by [`displace`] and [`energy_distribution`].
pub fn displaced_truncation(rho: &DensityMatrix, alpha: Complex64) -> usize {
    default_truncation(alpha.norm(), rho.amplitude_scale())
}

/// `D(α) ρ D†(α)` with the default output cutoff.
pub fn displace(rho: &DensityMatrix, alpha: Complex64) -> Result<DensityMatrix> {
    displace_to(rho, alpha, displaced_truncation(rho, alpha))
}

/// `D(α) ρ D†(α)` truncated to Fock indices `0..=n_max`.
///
/// Fails if the trace drops by more than [`EPS_TAIL`].
pub fn displace_to(rho: &DensityMatrix, alpha: Complex64, n_max: usize) -> Result<DensityMatrix> {
    check_alpha(alpha)?;
    let cols = rho.support() + 1;
    let d = displacement_block(alpha, n_max + 1, cols);
    let block = rho.entries().view((0, 0), (cols, cols));
    let out = &d * block * d.adjoint();
    let before: f64 = (0..cols).map(|i| block[(i, i)].re).sum();
    let after: f64 = (0..=n_max).map(|i| out[(i, i)].re).sum();
    if before - after > EPS_TAIL {
        let leak = column_leakage(&d);
        let column = worst(&leak);
        return Err(Error::Leakage {
            column,
            leakage: before - after,
            tolerance: EPS_TAIL,
        });
    }
    DensityMatrix::from_hermitian(out)
}

fn worst(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Diagonal of `D(α) ρ D†(α)` over `0..=n_max`, without clamping or
/// normalisation checks. Computed from the spectral factors of `ρ`.
pub(crate) fn displaced_diagonal(rho: &DensityMatrix, alpha: Complex64, n_max: usize) -> Vec<f64> {
    let cols = rho.support() + 1;
    let d = displacement_block(alpha, n_max + 1, cols);
    let mut p = vec![0.0; n_max + 1];
    for (lambda, v) in rho.components() {
        let v = v.rows(0, cols);
        let dv = &d * v;
        for (pn, z) in p.iter_mut().zip(dv.iter()) {
            *pn += lambda * z.norm_sqr();
        }
    }
    p
}

/// Energy distribution `P_n(α) = ⟨n|D(α) ρ D†(α)|n⟩` with the default
/// cutoff; see [`energy_distribution_to`].
pub fn energy_distribution(rho: &DensityMatrix, alpha: Complex64) -> Result<Vec<f64>> {
    energy_distribution_to(rho, alpha, displaced_truncation(rho, alpha))
}

/// Energy distribution over `0..=n_max`.
///
/// Entries in `[-1e-12, 0)` are clamped to zero, anything more negative is
/// an error, and the total must not fall short of `Tr ρ` by more than
/// [`EPS_TAIL`].
pub fn energy_distribution_to(rho: &DensityMatrix, alpha: Complex64, n_max: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let mut p = displaced_diagonal(rho, alpha, n_max);
    clamp_probabilities(&mut p)?;
    let total: f64 = p.iter().sum();
    let shortfall = rho.trace() - total;
    if shortfall > EPS_TAIL {
        return Err(Error::Leakage {
            column: n_max,
            leakage: shortfall,
            tolerance: EPS_TAIL,
        });
    }
    Ok(p)
}

pub(crate) fn clamp_probabilities(p: &mut [f64]) -> Result<()> {
    for (index, v) in p.iter_mut().enumerate() {
        if *v < -NEGATIVE_CLAMP {
            return Err(Error::NegativeProbability { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}
