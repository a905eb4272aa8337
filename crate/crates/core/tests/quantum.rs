use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superscar::pes::{MassParameters, PotentialSurface};
use superscar::quantum::spectrum::energy_grid;
use superscar::quantum::*;
use std::sync::OnceLock;

const HBAR: f64 = 1.0;

fn small_surrogate() -> (Hamiltonian, MassParameters) {
    let s = PotentialSurface::surrogate("licn-surrogate").unwrap();
    let m = MassParameters::licn();
    let g = GridSpec::new(36, 40, 3.3, 5.6).unwrap();
    (Hamiltonian::new(&s, &m, g, HBAR, Some(0.06)).unwrap(), m)
}

struct Fixture {
    ham: Hamiltonian,
    eig: Eigenpairs,
    packet: WaveField,
}

/// Bending ladder of the curved channel: well separated levels, so a long
/// window resolves every populated stick.
fn channel() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = PotentialSurface::surrogate("curved-channel").unwrap();
        let g = GridSpec::new(32, 48, 3.8, 5.0).unwrap();
        let ham = Hamiltonian::new(&s, &MassParameters::licn(), g, HBAR, Some(0.05)).unwrap();
        let eig = diagonalize_small(&ham, g.len()).unwrap();
        let spec = PacketSpec { r: 4.43, theta: 0.55, p_r: 0.0, p_theta: 0.0, sigma_r: 0.06, sigma_theta: 0.08 };
        let packet = spec.build(g, HBAR).unwrap();
        Fixture { ham, eig, packet }
    })
}

fn bend_packet(grid: GridSpec) -> WaveField {
    let spec = PacketSpec { r: 4.2, theta: 2.2, p_r: 0.0, p_theta: 0.0, sigma_r: 0.12, sigma_theta: 0.12 };
    spec.build(grid, HBAR).unwrap()
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> WaveField {
    let re = ndarray::Array2::from_shape_fn((grid.n_r, grid.n_theta), |_| rng.random_range(-1.0..1.0));
    let im = ndarray::Array2::from_shape_fn((grid.n_r, grid.n_theta), |_| rng.random_range(-1.0..1.0));
    let mut f = WaveField { grid, hbar: HBAR, re, im };
    f.normalize().unwrap();
    f
}

/// Eigenstate sum `Σ_m e^{−(E_m−E)²T²/4ħ²} ⟨m|φ⟩ |m⟩`, normalized.
fn eigen_sum(eig: &Eigenpairs, f0: &WaveField, e: f64, t_e: f64) -> WaveField {
    let mut out = WaveField::zeros(f0.grid, f0.hbar);
    for (v, m) in eig.values.iter().zip(&eig.vectors) {
        let c = m.inner(f0) * (-((v - e) * t_e / (2.0 * HBAR)).powi(2)).exp();
        out.re.scaled_add(c.re, &m.re);
        out.im.scaled_add(c.im, &m.re);
    }
    out.normalize().unwrap();
    out
}

#[test]
fn sticks_match_dense_eigenvalues_and_weights() {
    let Fixture { ham, eig, packet: f0 } = channel();
    let weights: Vec<f64> = eig.vectors.iter().map(|v| v.inner(&f0).norm_sqr()).collect();
    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);

    let window = 2.5e4;
    let cheb = Chebyshev::new(ham);
    let span = 6.0 * window;
    let dt = 0.9 * std::f64::consts::PI * HBAR / (2.0 * cheb.half_width);
    let reach = ((span / dt).round() + 1.0) * dt;
    let n = superscar::quantum::chebyshev::terms_needed(cheb.phase_extent(reach), 1e-15).div_ceil(2);
    let run = cheb.moments(f0, n, None).unwrap();
    let ac = Autocorrelation::from_moments(&run, dt, span).unwrap();

    let strong: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 5e-3).collect();
    assert!(strong.len() >= 3, "packet should populate several levels");
    let lo = eig.values[strong[0]] - 2e-3;
    let hi = eig.values[*strong.last().unwrap()] + 2e-3;
    let spectrum = Spectrum::windowed(&ac, window, &energy_grid(lo, hi, ((hi - lo) / 1e-5) as usize)).unwrap();
    let sticks = spectrum.sticks(5e-3);
    let st: Vec<(f64, f64)> = strong.iter().map(|&i| (eig.values[i], weights[i])).collect();
    assert_eq!(sticks.len(), strong.len(), "{sticks:?}\n{st:?}");
    for (s, &i) in sticks.iter().zip(&strong) {
        assert!((s.energy - eig.values[i]).abs() < 1e-6, "stick {} vs eigenvalue {}", s.energy, eig.values[i]);
        assert!((s.weight - weights[i]).abs() < 1e-6, "weight {} vs {}", s.weight, weights[i]);
    }
}

#[test]
fn scar_function_equals_eigenstate_sum() {
    let Fixture { ham, eig, packet: f0 } = channel();
    let e = ham.expectation(f0);
    for t_e in [800.0, 3000.0] {
        let (sf, _) = scar_function(ham, f0, e, t_e, 0, 0).unwrap();
        let reference = eigen_sum(eig, f0, e, t_e);
        let overlap = sf.field.overlap(&reference);
        assert!(overlap >= 1.0 - 1e-6, "T_E = {t_e}: overlap {overlap}");
        assert!((sf.field.norm() - 1.0).abs() < 1e-12);
        assert!((sf.mean_energy - e).abs() < HBAR / t_e * 10.0);
    }
}

#[test]
fn eigenstate_input_is_a_fixed_point_of_the_filter() {
    let Fixture { ham, eig, .. } = channel();
    let v = &eig.vectors[3];
    let (sf, run) = scar_function(ham, v, eig.values[3], 2000.0, 0, 0).unwrap();
    assert!((sf.field.overlap(v) - 1.0).abs() < 1e-8);
    for t in [0.0, 1234.5, 5000.0] {
        let c = run.autocorrelation(t).unwrap();
        assert!((c.norm() - 1.0).abs() < 1e-9, "|C({t})| = {}", c.norm());
    }
}

#[test]
fn two_level_autocorrelation() {
    let Fixture { ham, eig, .. } = channel();
    let (a2, b2): (f64, f64) = (0.3, 0.7);
    let mut f = WaveField::zeros(ham.grid, HBAR);
    f.re.scaled_add(a2.sqrt(), &eig.vectors[2].re);
    f.re.scaled_add(b2.sqrt(), &eig.vectors[7].re);
    let cheb = Chebyshev::new(ham);
    let ac = Autocorrelation::by_propagation(&cheb, &f, 700.0, 6).unwrap();
    for (k, c) in ac.values.iter().enumerate() {
        let t = k as f64 * 700.0;
        let exact = Complex64::from_polar(a2, -eig.values[2] * t / HBAR) + Complex64::from_polar(b2, -eig.values[7] * t / HBAR);
        assert!((c - exact).norm() < 1e-10, "t = {t}: {c} vs {exact}");
    }
}

#[test]
fn propagation_is_unitary_and_a_semigroup() {
    let (ham, _) = small_surrogate();
    let cheb = Chebyshev::new(&ham);
    let f0 = bend_packet(ham.grid);
    let e0 = ham.expectation(&f0);
    assert_eq!(cheb.propagate(&f0, 0.0).unwrap(), f0);

    let t = 5000.0;
    let full = cheb.propagate(&f0, t).unwrap();
    let half = cheb.propagate(&cheb.propagate(&f0, 0.5 * t).unwrap(), 0.5 * t).unwrap();
    assert!((full.norm() - 1.0).abs() / t <= 1e-10);
    assert!((ham.expectation(&full) - e0).abs() <= 1e-8 * e0.abs());
    let diff = full.inner(&full).re + half.inner(&half).re - 2.0 * full.inner(&half).re;
    assert!(diff.max(0.0).sqrt() < 1e-10, "semigroup defect {}", diff.sqrt());

    let back = cheb.propagate(&full, -t).unwrap();
    assert!((back.overlap(&f0) - 1.0).abs() < 1e-10);
}

#[test]
fn hamiltonian_is_hermitian_on_random_pairs() {
    let (ham, _) = small_surrogate();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scale = ham.spectral_bounds().1;
    for _ in 0..100 {
        let f = random_field(ham.grid, &mut rng);
        let g = random_field(ham.grid, &mut rng);
        let lhs = f.inner(&ham.apply(&g));
        let rhs = ham.apply(&f).inner(&g);
        assert!((lhs - rhs).norm() <= 1e-11 * scale, "{lhs} vs {rhs}");
        let own = f.inner(&ham.apply(&f));
        assert!(own.im.abs() <= 1e-12 * scale);
    }
}

#[test]
fn separable_harmonic_spectrum() {
    let s = PotentialSurface::surrogate("harmonic").unwrap();
    let m = MassParameters::licn();
    let h = match s.backend() {
        superscar::pes::Backend::Harmonic(h) => *h,
        _ => unreachable!(),
    };
    let g = GridSpec::new(47, 56, 58.2, 61.8).unwrap();
    let ham = Hamiltonian::new(&s, &m, g, HBAR, None).unwrap();
    let eig = diagonalize_small(&ham, 6).unwrap();
    let w_r = (h.k_r / m.mu1).sqrt();
    let w_t = (2.0 * m.bend(h.r0) * h.k_theta).sqrt();
    let mut exact: Vec<f64> = (0..4)
        .flat_map(|a| (0..8).map(move |b| HBAR * w_r * (a as f64 + 0.5) + HBAR * w_t * (b as f64 + 0.5)))
        .collect();
    exact.sort_by(f64::total_cmp);
    for (e, x) in eig.values.iter().zip(&exact) {
        assert!(((e - x) / x).abs() < 1e-6, "{e} vs {x}");
    }
    for (i, a) in eig.vectors.iter().enumerate() {
        for (j, b) in eig.vectors.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((a.inner(b).re - expect).abs() < 1e-10);
        }
    }
}

#[test]
fn coherent_state_follows_the_classical_trajectory() {
    let s = PotentialSurface::surrogate("harmonic").unwrap();
    let m = MassParameters::licn();
    let g = GridSpec::new(63, 48, 58.0, 62.0).unwrap();
    let ham = Hamiltonian::new(&s, &m, g, HBAR, None).unwrap();
    let cheb = Chebyshev::new(&ham);
    let w = (0.1 / m.mu1).sqrt();
    let sigma = (HBAR / (2.0 * m.mu1 * w)).sqrt();
    let w_t = (2.0 * m.bend(60.0) * 0.02).sqrt();
    let sigma_t = (HBAR * m.bend(60.0) / w_t).sqrt();
    let (r0, dr) = (60.0, 0.4);
    let f0 = PacketSpec { r: r0 + dr, theta: std::f64::consts::FRAC_PI_2, p_r: 0.0, p_theta: 0.0, sigma_r: sigma, sigma_theta: sigma_t }
        .build(g, HBAR)
        .unwrap();
    let period = 2.0 * std::f64::consts::PI / w;
    let mut f = f0.clone();
    let steps = 16;
    for k in 1..=steps {
        f = cheb.propagate(&f, period / steps as f64).unwrap();
        let t = k as f64 * period / steps as f64;
        let rho = f.density();
        let mean_r: f64 = g.r_points().iter().enumerate().map(|(j, r)| r * rho.row(j).sum()).sum::<f64>() * g.cell();
        let classical = r0 + dr * (w * t).cos();
        assert!((mean_r - classical).abs() < 1e-6, "t = {t}: ⟨R⟩ = {mean_r}, classical {classical}");
    }
}

#[test]
fn spectrum_is_the_stick_spectrum_blurred() {
    let Fixture { ham, eig, packet: f0 } = channel();
    let cheb = Chebyshev::new(ham);
    let window = 2000.0;
    let dt = 0.9 * std::f64::consts::PI * HBAR / (2.0 * cheb.half_width);
    let span = 6.0 * window;
    let n = superscar::quantum::chebyshev::terms_needed(cheb.phase_extent(span + 2.0 * dt), 1e-15).div_ceil(2);
    let run = cheb.moments(f0, n, None).unwrap();
    let ac = Autocorrelation::from_moments(&run, dt, span).unwrap();
    let e0 = ham.expectation(f0);
    let grid = energy_grid(e0 - 0.01, e0 + 0.01, 201);
    let spec = Spectrum::windowed(&ac, window, &grid).unwrap();
    let width = HBAR * 2f64.sqrt() / window;
    for (e, d) in grid.iter().zip(&spec.density) {
        let conv: f64 = eig
            .values
            .iter()
            .zip(&eig.vectors)
            .map(|(v, m)| m.inner(f0).norm_sqr() * (-((e - v) / width).powi(2) / 2.0).exp() / (width * (2.0 * std::f64::consts::PI).sqrt()))
            .sum();
        assert!((d - conv).abs() < 1e-6 * conv.abs().max(1.0), "E = {e}: {d} vs {conv}");
    }
}

#[test]
fn scar_function_is_robust_to_packet_width() {
    let (ham, _) = small_surrogate();
    let base = PacketSpec { r: 4.2, theta: 2.2, p_r: 0.0, p_theta: 0.0, sigma_r: 0.12, sigma_theta: 0.12 };
    let wide = PacketSpec { sigma_r: 0.132, sigma_theta: 0.132, ..base };
    let e = ham.expectation(&base.build(ham.grid, HBAR).unwrap());
    let t_e = 800.0;
    let (a, _) = scar_function(&ham, &base.build(ham.grid, HBAR).unwrap(), e, t_e, 0, 0).unwrap();
    let (b, _) = scar_function(&ham, &wide.build(ham.grid, HBAR).unwrap(), e, t_e, 0, 0).unwrap();
    assert!(1.0 - a.field.overlap(&b.field) < 1e-2);
}

#[test]
fn resolution_errors_are_reported() {
    let (ham, _) = small_surrogate();
    let f0 = bend_packet(ham.grid);
    let run = Chebyshev::new(&ham).moments(&f0, 50, None).unwrap();
    assert!(run.autocorrelation(1e6).is_err());
    assert!(run.max_time(1e-15) > 0.0);
}
