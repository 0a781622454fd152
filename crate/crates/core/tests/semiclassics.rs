use std::f64::consts::PI;

use phasezone::numerics::{gauss_legendre, loglog_slope};
use phasezone::semiclassics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Total-variation distance between the β = 5 overlap estimate and the
/// Poisson distribution, from an independent radial integration of the
/// disc (adaptive quadrature, 1e-13 relative) at first build.
const TV_BETA_5: f64 = 0.125_950_418_054_064_57;

/// Fraction of the disc inside the annulus `a ≤ r ≤ b`, integrating the
/// angular width of each circle of radius `r` that falls in the disc.
fn annulus_fraction(disc: &Disc, a: f64, b: f64) -> f64 {
    let (d, big_r) = (disc.d, disc.r);
    let lo = a.max(d - big_r).max(0.0);
    let hi = b.min(d + big_r);
    if hi <= lo {
        return 0.0;
    }
    let width = |r: f64| {
        if r <= big_r - d {
            return 2.0 * PI;
        }
        let c = ((r * r + d * d - big_r * big_r) / (2.0 * r * d)).clamp(-1.0, 1.0);
        2.0 * c.acos()
    };
    // split where the integrand has square-root kinks
    let mut cuts = vec![lo, hi];
    for k in [d - big_r, big_r - d, d + big_r] {
        if k > lo && k < hi {
            cuts.push(k);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let (x, w) = gauss_legendre(64);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        // t² substitution on both ends of each piece tames the kinks
        let (p, q) = (pair[0], pair[1]);
        let mid = 0.5 * (p + q);
        for (s, e) in [(p, mid), (q, mid)] {
            for (xi, wi) in x.iter().zip(&w) {
                let t = 0.5 * (xi + 1.0);
                let r = s + (e - s) * t * t;
                let jac = (e - s).abs() * 2.0 * t * 0.5;
                total += wi * jac * r * width(r);
            }
        }
    }
    total / disc.area()
}

#[test]
fn overlap_distribution_matches_radial_integration() {
    for beta in [0.3, 1.0, 2.0, 5.0] {
        let disc = Disc::coherent(beta).unwrap();
        let p = overlap_distribution(beta, 0).unwrap();
        for (n, pn) in p.iter().enumerate() {
            let b = band(n);
            let want = annulus_fraction(&disc, b.r_inner, b.r_outer);
            assert!((pn - want).abs() < 1e-9, "β={beta} n={n}: {pn} vs {want}");
        }
    }
}

#[test]
fn tv_distance_regression_at_beta_five() {
    let r = compare_poisson(5.0, 0).unwrap();
    assert!((r.tv_distance - TV_BETA_5).abs() < 1e-9, "{}", r.tv_distance);
    // the same quantity from the radial oracle
    let disc = Disc::coherent(5.0).unwrap();
    let tv: f64 = 0.5
        * r.table
            .iter()
            .map(|row| {
                let b = band(row.n);
                (annulus_fraction(&disc, b.r_inner, b.r_outer) - row.p_poisson).abs()
            })
            .sum::<f64>();
    assert!((tv - TV_BETA_5).abs() < 1e-9);
}

#[test]
fn beta_five_shape() {
    let r = compare_poisson(5.0, 0).unwrap();
    assert!((r.overlap_mean / 25.0 - 1.0).abs() < 0.05);
    let p: Vec<f64> = r.table.iter().map(|row| row.p_overlap).collect();
    let peak = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(p[..=peak].windows(2).all(|w| w[0] <= w[1]));
    assert!(p[peak..].windows(2).all(|w| w[0] >= w[1]));
    // a semicircle of half-width 2β has variance β², like the Poissonian
    assert!((r.overlap_variance / 25.0 - 1.0).abs() < 0.05, "{}", r.overlap_variance);
}

#[test]
fn lens_against_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples = 10_000_000usize;
    let mut hits = 0usize;
    // unit discs one apart; sample the bounding box of the first
    for _ in 0..samples {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        if x * x + y * y <= 1.0 && (x - 1.0).powi(2) + y * y <= 1.0 {
            hits += 1;
        }
    }
    let estimate = 4.0 * hits as f64 / samples as f64;
    let sigma = 4.0 * (0.31 * 0.69 / samples as f64).sqrt();
    let lens = circle_circle_lens(1.0, 1.0, 1.0);
    assert!((estimate - lens).abs() < 5.0 * sigma, "{estimate} vs {lens}");
}

#[test]
fn band_edges_scale_as_square_root() {
    let ns: Vec<f64> = (1..=100).map(f64::from).collect();
    let r: Vec<f64> = (1..=100).map(|n| band(n).r_inner).collect();
    let slope = loglog_slope(&ns, &r).unwrap();
    assert!((slope - 0.5).abs() < 1e-12);
}

#[test]
fn support_is_confined_to_the_disc() {
    for beta in [0.5, 1.0, 2.0, 5.0] {
        let (d, big_r) = (2f64.sqrt() * beta, 2f64.sqrt());
        for (n, p) in overlap_distribution(beta, 80).unwrap().iter().enumerate() {
            let b = band(n);
            if b.r_inner > d + big_r || b.r_outer < d - big_r {
                assert_eq!(*p, 0.0, "β={beta} n={n}");
            }
        }
    }
}

proptest! {
    #[test]
    fn lens_is_symmetric(r1 in 0.01f64..5.0, r2 in 0.01f64..5.0, d in 0.0f64..10.0) {
        prop_assert_eq!(circle_circle_lens(r1, r2, d), circle_circle_lens(r2, r1, d));
    }

    #[test]
    fn lens_shrinks_with_separation(r1 in 0.1f64..3.0, r2 in 0.1f64..3.0, d in 0.0f64..6.0, step in 0.0f64..1.0) {
        let a = circle_circle_lens(r1, r2, d);
        let b = circle_circle_lens(r1, r2, d + step);
        prop_assert!(b <= a + 1e-12 * a.max(1.0));
        prop_assert!(a <= PI * r1.min(r2).powi(2) * (1.0 + 1e-15));
    }

    #[test]
    fn distribution_partitions_unity(beta in 0.0f64..8.0) {
        let p = overlap_distribution(beta, 0).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|q| *q >= 0.0));
    }
}
