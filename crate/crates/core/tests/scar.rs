use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use superscar::quantum::{GridSpec, WaveField};
use superscar::scar::*;

fn sample(n: usize, sigma: f64) -> WidthSample {
    WidthSample { n, sigma, r: vec![], variance: vec![], weight: vec![] }
}

#[test]
fn ladder_reproduces_published_pairs() {
    let l = bs_ladder(3.5, 2, 1..=20).unwrap();
    assert_eq!(l.hbar(3), Some(1.0));
    let l1 = bs_ladder(13.75, 3, [10]).unwrap();
    assert!((l1.hbar(10).unwrap() - 1.279_069_767_441_860_4).abs() < 1e-15);
    for &(n, h) in &l.entries {
        let x = n as f64 + 0.5;
        assert!((h * x - 3.5).abs() <= 2.0 * f64::EPSILON * 3.5);
    }
    assert!(l.entries.windows(2).all(|w| w[1].1 < w[0].1));
}

/// Direct double sum over the grid, written independently of the library.
fn width_oracle(f: &WaveField) -> f64 {
    let g = f.grid;
    let (dr, dt) = (g.dr(), g.dtheta());
    let mut rows = Vec::new();
    for j in 0..g.n_r {
        let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for m in 0..g.n_theta {
            let rho = f.get(j, m).norm_sqr();
            let t = g.theta(m);
            w += rho * dt;
            m1 += t * rho * dt;
            m2 += t * t * rho * dt;
        }
        rows.push((w, m1, m2));
    }
    let wmax = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let kept: Vec<_> = rows.into_iter().filter(|r| r.0 >= 1e-12 * wmax).collect();
    let total: f64 = kept.iter().map(|r| r.0 * dr).sum();
    kept.iter().map(|&(w, m1, m2)| (w / total) * (m2 / w - (m1 / w).powi(2)) * dr).sum::<f64>().sqrt()
}

#[test]
fn width_matches_quadrature_oracle_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let g = GridSpec::new(rng.random_range(8..40), rng.random_range(8..40), 3.0, 5.0).unwrap();
        let re = ndarray::Array2::from_shape_fn((g.n_r, g.n_theta), |_| rng.random_range(-1.0..1.0));
        let im = ndarray::Array2::from_shape_fn((g.n_r, g.n_theta), |_| rng.random_range(-1.0..1.0));
        let mut f = WaveField { grid: g, hbar: 1.0, re, im };
        f.normalize().unwrap();
        let w = transverse_width(&f, 0).unwrap();
        let oracle = width_oracle(&f);
        assert!((w.sigma - oracle).abs() <= 1e-10 * oracle, "{} vs {oracle}", w.sigma);
        let norm: f64 = w.weight.iter().sum::<f64>() * g.dr();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn gaussian_product_widths() {
    let g = GridSpec::new(60, 400, 2.0, 6.0).unwrap();
    for (s, c) in [(0.05, 1.2), (0.1, 1.9), (0.2, 1.57)] {
        let f = WaveField::from_fn(g, 1.0, |r, t| {
            let radial = (r - 4.0).sin().abs() + 0.3 * (2.0 * r).cos().powi(2);
            Complex64::new(radial * (-(t - c).powi(2) / (4.0 * s * s)).exp(), 0.0)
        });
        let w = transverse_width(&f, 0).unwrap();
        assert!((w.sigma - s).abs() <= 1e-8, "{} vs {s}", w.sigma);
        let kept: Vec<f64> = w.variance.iter().copied().filter(|v| v.is_finite()).collect();
        let spread = kept.iter().copied().fold(f64::NEG_INFINITY, f64::max) - kept.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-12);
    }
}

#[test]
fn exact_power_laws_are_recovered() {
    for (alpha, nu) in [(1.0 / 3.0, 2u32), (0.5, 3)] {
        let ladder = bs_ladder(9.7, nu, 3..=14).unwrap();
        let samples: Vec<WidthSample> =
            (3..=14).map(|n| sample(n, 0.8 * ladder.quantum_number(n).powf(-alpha))).collect();
        let fit = scaling_fit(&samples, &ladder).unwrap();
        assert!((fit.alpha - alpha).abs() <= 1e-12);
        assert!((fit.prefactor - 0.8).abs() <= 1e-12);
    }
}

#[test]
fn noisy_fits_are_calibrated() {
    // 2% multiplicative noise on 8 points, 1000 seeded trials
    let ladder = bs_ladder(3.5, 2, 3..=10).unwrap();
    let truth = 1.0 / 3.0;
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut within = 0;
    let mut alphas = Vec::new();
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<WidthSample> = (3..=10)
            .map(|n| sample(n, ladder.quantum_number(n).powf(-truth) * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = scaling_fit(&samples, &ladder).unwrap();
        if (fit.alpha - truth).abs() <= 3.0 * fit.alpha_err {
            within += 1;
        }
        alphas.push(fit.alpha);
    }
    // Student t with 6 degrees of freedom leaves 2.4% outside ±3
    assert!(within >= 960, "{within} of 1000 within 3 standard errors");
    let mean = alphas.iter().sum::<f64>() / 1000.0;
    let sd = (alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 999.0).sqrt();
    assert!((mean - truth).abs() <= 3.0 * sd / 1000f64.sqrt());
}

#[test]
fn fits_need_enough_samples() {
    let ladder = bs_ladder(3.5, 2, 3..=5).unwrap();
    let samples: Vec<WidthSample> = (3..=5).map(|n| sample(n, 1.0 / n as f64)).collect();
    assert!(scaling_fit(&samples, &ladder).is_err());
    let narrow = bs_ladder(3.5, 2, 10..=14).unwrap();
    let samples: Vec<WidthSample> = (10..=14).map(|n| sample(n, 1.0 / n as f64)).collect();
    assert!(scaling_fit(&samples, &narrow).is_err());
    let wide = bs_ladder(3.5, 2, 2..=8).unwrap();
    let mut samples: Vec<WidthSample> = (2..=8).map(|n| sample(n, 1.0 / n as f64)).collect();
    samples[2].sigma = 0.0;
    assert!(scaling_fit(&samples, &wide).is_err());
}

proptest! {
    #[test]
    fn ladder_identity(s in 0.1f64..100.0, nu in 0u32..6, n0 in 1usize..30, len in 1usize..40) {
        let l = bs_ladder(s, nu, n0..n0 + len).unwrap();
        for &(n, h) in &l.entries {
            prop_assert!((h * l.quantum_number(n) - s).abs() <= 2.0 * f64::EPSILON * s);
        }
        prop_assert!(l.entries.windows(2).all(|w| w[1].1 < w[0].1 && w[1].1 > 0.0));
    }

    #[test]
    fn fit_is_scale_equivariant(c in 1e-3f64..1e3, alpha in 0.1f64..1.0, wiggle in prop::collection::vec(-0.05f64..0.05, 8)) {
        let ladder = bs_ladder(5.0, 2, 2..=9).unwrap();
        let base: Vec<WidthSample> = (2..=9).zip(&wiggle).map(|(n, w)| sample(n, ladder.quantum_number(n).powf(-alpha) * (1.0 + w))).collect();
        let scaled: Vec<WidthSample> = base.iter().map(|s| sample(s.n, c * s.sigma)).collect();
        let a = scaling_fit(&base, &ladder).unwrap();
        let b = scaling_fit(&scaled, &ladder).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() <= 1e-10);
        prop_assert!((b.prefactor / a.prefactor / c - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn width_ignores_global_phase(phase in 0.0f64..6.3, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridSpec::new(12, 16, 3.0, 5.0).unwrap();
        let re = ndarray::Array2::from_shape_fn((g.n_r, g.n_theta), |_| rng.random_range(-1.0..1.0));
        let im = ndarray::Array2::from_shape_fn((g.n_r, g.n_theta), |_| rng.random_range(-1.0..1.0));
        let f = WaveField { grid: g, hbar: 1.0, re, im };
        let mut rotated = f.clone();
        rotated.scale(Complex64::from_polar(1.0, phase));
        let a = transverse_width(&f, 0).unwrap().sigma;
        let b = transverse_width(&rotated, 0).unwrap().sigma;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}
