use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use num_complex::Complex64;
use phasezone::fock::{self, coherent_amplitudes, default_truncation, DensityMatrix, FockState, PhasePoint};
use phasezone::wigner::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn number(n: usize) -> FockState {
    FockState::number(n, n).unwrap()
}

fn coherent(re: f64, im: f64) -> FockState {
    let beta = Complex64::new(re, im);
    coherent_amplitudes(beta, default_truncation(0.0, beta.norm())).unwrap()
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
fn laguerre(n: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Closed forms: number states `(-1)^n/π e^{-r²} L_n(2r²)`, coherent
/// states a unit Gaussian centred at `√2 (Re β, Im β)`.
fn number_wigner(n: usize, u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * FRAC_1_PI * (-r2).exp() * laguerre(n, 2.0 * r2)
}

fn coherent_wigner(re: f64, im: f64, u: f64, v: f64) -> f64 {
    let (u0, v0) = (2f64.sqrt() * re, 2f64.sqrt() * im);
    FRAC_1_PI * (-(u - u0).powi(2) - (v - v0).powi(2)).exp()
}

fn random_points(seed: u64, count: usize, radius: f64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            PhasePoint::new(r * phi.cos(), r * phi.sin())
        })
        .collect()
}

#[test]
fn direct_integral_matches_closed_forms() {
    let pts = random_points(7, 40, 4.0);
    for n in [0, 1, 2, 5, 12] {
        let rho = number(n).density_matrix();
        for p in &pts {
            let w = wigner_at(&rho, *p).unwrap();
            assert!((w - number_wigner(n, p.u, p.v)).abs() < 1e-10, "n={n} at {p:?}");
        }
    }
    for (re, im) in [(1.0, 0.0), (-0.6, 1.3), (2.0, -1.0)] {
        let rho = coherent(re, im).density_matrix();
        for p in &pts {
            let w = wigner_at(&rho, *p).unwrap();
            assert!((w - coherent_wigner(re, im, p.u, p.v)).abs() < 1e-10);
        }
    }
}

#[test]
fn parity_sum_equals_direct_integral() {
    let states = [number(0), number(1), number(3), coherent(1.0, 0.0), coherent(2.0, 0.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for psi in &states {
        let rho = psi.density_matrix();
        for _ in 0..12 {
            let alpha = Complex64::from_polar(3.0 * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>());
            let point = PHASE_CONVENTION.phase_point(alpha);
            let s = parity_sum_at(&rho, point).unwrap();
            let w = wigner_at(&rho, point).unwrap();
            assert!((s.value - 2.0 * PI * w).abs() < 1e-6);
            assert!(s.last_term <= PARITY_LAST_TERM_TOL);
        }
    }
}

#[test]
fn convention_check_selects_the_compiled_convention() {
    let pts = random_points(3, 6, 3.0);
    for psi in [number(1), number(3), coherent(1.0, 0.0)] {
        let report = convention_check(&psi.density_matrix(), &pts).unwrap();
        assert_eq!(report.winner, Some(PHASE_CONVENTION));
        assert_eq!(report.matching, vec![PHASE_CONVENTION]);
    }
}

#[test]
fn grid_fields_agree_and_normalise() {
    let grid = PhaseGrid::square(-6.0, 6.0, 61).unwrap();
    for psi in [number(0), number(1), coherent(0.5, -0.5)] {
        let rho = psi.density_matrix();
        let direct = wigner_direct(&rho, &grid).unwrap();
        let parity = wigner_parity(&rho, &grid).unwrap();
        assert!(direct.contained());
        assert!(direct.max_abs_deviation(&parity).unwrap() < 1e-6 / (2.0 * PI));
        assert!((direct.total() - 1.0).abs() < 1e-4, "{}", direct.total());
        assert!(direct.values().iter().all(|w| w.abs() <= FRAC_1_PI + 1e-6));
    }
}

#[test]
fn first_excited_state_minimum_sits_at_origin() {
    let grid = PhaseGrid::square(-3.0, 3.0, 61).unwrap();
    let w = wigner_direct(&number(1).density_matrix(), &grid).unwrap();
    let (min, at) = w.min();
    assert!((min + FRAC_1_PI).abs() < 1e-4);
    assert!(at.u.abs() < 1e-12 && at.v.abs() < 1e-12);
}

#[test]
fn small_grid_is_flagged_uncontained() {
    let grid = PhaseGrid::square(-2.0, 2.0, 11).unwrap();
    let w = wigner_direct(&number(4).density_matrix(), &grid).unwrap();
    assert!(!w.contained());
}

#[test]
fn overlap_trace_reproduces_state_overlaps() {
    let grid = PhaseGrid::square(-7.0, 7.0, 141).unwrap();
    let field = |psi: &FockState| wigner_direct(&psi.density_matrix(), &grid).unwrap();
    let w0 = field(&number(0));
    let w1 = field(&number(1));
    let wa = field(&coherent(0.8, 0.0));
    let wb = field(&coherent(0.0, 0.6));
    assert!((overlap_trace(&w0, &w0).unwrap() - 1.0).abs() < 1e-8);
    assert!(overlap_trace(&w0, &w1).unwrap().abs() < 1e-8);
    // |⟨β₁|β₂⟩|² = exp(-|β₁ - β₂|²)
    let want = (-(0.64f64 + 0.36)).exp();
    assert!((overlap_trace(&wa, &wb).unwrap() - want).abs() < 1e-8);
}

#[test]
fn mixtures_are_linear_in_the_wigner_function() {
    let a = number(0).density_matrix();
    let b = number(2).density_matrix();
    let mix = DensityMatrix::mixture(&[(1.0, a.clone()), (3.0, b.clone())]).unwrap();
    for p in random_points(5, 10, 3.0) {
        let want = 0.25 * wigner_at(&a, p).unwrap() + 0.75 * wigner_at(&b, p).unwrap();
        assert!((wigner_at(&mix, p).unwrap() - want).abs() < 1e-12);
    }
}

/// Fock-basis oracle for the rotated quadrature density: rotate the
/// amplitudes, `c_n → c_n e^{-inθ}`, and square the position wavefunction.
fn rotated_oracle(psi: &FockState, theta: f64, x: f64) -> f64 {
    let rotated: Vec<Complex64> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -(n as f64) * theta))
        .collect();
    FockState::new(rotated).unwrap().wavefunction(x).norm_sqr()
}

#[test]
fn rotated_quadrature_matches_phase_rotation() {
    let xs: Vec<f64> = (-30..=30).map(|k| 0.2 * k as f64).collect();
    let superposition = FockState::new(vec![
        Complex64::new(0.6, 0.0),
        Complex64::new(0.0, 0.48),
        Complex64::new(-0.64, 0.0),
    ])
    .unwrap();
    for psi in [coherent(1.0, 0.5), number(3), superposition] {
        for theta in [0.2, FRAC_PI_6, 0.7, FRAC_PI_2, 2.9, -1.2, 3.0 * PI] {
            let dens = rotated_quadrature(&psi, theta, &xs).unwrap();
            for (x, d) in xs.iter().zip(&dens) {
                let want = rotated_oracle(&psi, theta, *x);
                assert!((d - want).abs() < 1e-9, "θ={theta} x={x}: {d} vs {want}");
            }
        }
    }
}

#[test]
fn radon_slices_match_rotated_quadratures() {
    // bilinear interpolation error scales as the squared spacing; 0.0125
    // keeps the L1 mismatch under 1e-4 on oblique lines
    let grid = PhaseGrid::square(-5.0, 5.0, 801).unwrap();
    let xs: Vec<f64> = (-100..=100).map(|k| 0.05 * k as f64).collect();
    let dx = 0.05;
    for psi in [number(1), coherent(0.7, -0.4)] {
        let w = wigner_direct(&psi.density_matrix(), &grid).unwrap();
        for theta in [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
            let slice = radon_slice(&w, theta, &xs).unwrap();
            let exact = rotated_quadrature(&psi, theta, &xs).unwrap();
            let l1: f64 = slice.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx;
            assert!(l1 < 1e-4, "θ={theta}: L1 = {l1:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wigner_values_are_bounded(n in 0usize..8, u in -5.0f64..5.0, v in -5.0f64..5.0) {
        let w = wigner_at(&number(n).density_matrix(), PhasePoint::new(u, v)).unwrap();
        prop_assert!(w.abs() <= FRAC_1_PI + 1e-6);
    }

    #[test]
    fn parity_and_direct_agree_for_random_coherent_states(
        re in -1.5f64..1.5,
        im in -1.5f64..1.5,
        u in -3.0f64..3.0,
        v in -3.0f64..3.0,
    ) {
        let rho = coherent(re, im).density_matrix();
        let p = PhasePoint::new(u, v);
        let s = parity_sum_at(&rho, p).unwrap();
        prop_assert!((s.value - 2.0 * PI * wigner_at(&rho, p).unwrap()).abs() < 1e-6);
        prop_assert!((s.value - 2.0 * PI * coherent_wigner(re, im, u, v)).abs() < 1e-8);
    }
}

#[test]
fn energy_distribution_and_parity_share_the_displacement() {
    // S(α) is the alternating sum of the displaced distribution at -α
    let rho = number(2).density_matrix();
    let alpha = Complex64::new(0.4, -0.9);
    let p = fock::energy_distribution(&rho, -alpha).unwrap();
    let alt: f64 = 2.0
        * p.iter()
            .enumerate()
            .map(|(n, q)| if n % 2 == 0 { *q } else { -q })
            .sum::<f64>();
    let s = parity_sum(&rho, alpha, p.len() - 1).unwrap();
    assert!((alt - s.value).abs() < 1e-14);
}
