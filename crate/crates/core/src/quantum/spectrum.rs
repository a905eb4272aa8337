//! Autocorrelation functions and the spectra derived from them.
//!
//! `I_T(E) = ∫ e^{−t²/T²} e^{iEt/ħ} C(t) dt` is reported as the density
//! `I_T/(2πħ)`, which integrates over E to the total stick weight. For a
//! stick spectrum `Σ w_m δ(E − E_m)` it is a sum of Gaussians of standard
//! deviation `ħ√2/T`.

use super::chebyshev::{Chebyshev, MomentRun};
use super::field::WaveField;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Autocorrelation {
    pub dt: f64,
    /// `C(k·dt)` for `k = 0..`; negative times follow from `C(−t) = C̄(t)`.
    pub values: Vec<Complex64>,
    pub hbar: f64,
}

impl Autocorrelation {
    pub fn span(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// Samples `C(t)` on `[0, span]` from Chebyshev moments.
    pub fn from_moments(run: &MomentRun, dt: f64, span: f64) -> Result<Self> {
        if !(dt > 0.0) || !(span >= 0.0) {
            return Err(Error::Contract("time step and span must be positive".into()));
        }
        let n = (span / dt).round() as usize;
        let values = crate::par::map_range(n + 1, |k| run.autocorrelation(k as f64 * dt))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dt, values, hbar: run.hbar })
    }

    /// Samples `C(t)` by stepping the packet itself with the propagator
    /// (the moment route is much cheaper; this one is its cross-check).
    pub fn by_propagation(cheb: &Chebyshev<'_>, f0: &WaveField, dt: f64, steps: usize) -> Result<Self> {
        let mut phi0 = f0.clone();
        phi0.normalize()?;
        let mut phi = phi0.clone();
        let mut values = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..steps {
            phi = cheb.propagate(&phi, dt)?;
            values.push(phi0.inner(&phi));
        }
        Ok(Self { dt, values, hbar: f0.hbar })
    }

    /// Default sampling step: Nyquist for the full spectral enclosure.
    pub fn nyquist_step(run: &MomentRun) -> f64 {
        0.9 * PI * run.hbar / (2.0 * run.half_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Stick {
    pub energy: f64,
    pub weight: f64,
}

/// A clump of the low-resolution spectrum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Band {
    pub center: f64,
    pub weight: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// `I_T(E)/(2πħ)`, per hartree.
    pub density: Vec<f64>,
    /// Gaussian cutoff T (a.u.).
    pub window: f64,
    pub hbar: f64,
    pub warnings: Vec<String>,
}

impl Spectrum {
    /// Evaluates the windowed spectrum on `energies` by trapezoid quadrature
    /// over the sampled autocorrelation (up to `min(span, 6T)`).
    pub fn windowed(ac: &Autocorrelation, window: f64, energies: &[f64]) -> Result<Self> {
        if !(window > 0.0) {
            return Err(Error::Contract(format!("window must be positive, got {window}")));
        }
        let mut warnings = Vec::new();
        let t_max = (6.0 * window).min(ac.span());
        if ac.span() < 3.0 * window {
            warnings.push(format!(
                "autocorrelation span {} a.u. is shorter than 3T = {} a.u.",
                ac.span(),
                3.0 * window
            ));
        }
        let n = ((t_max / ac.dt).floor() as usize).min(ac.values.len() - 1);
        let hbar = ac.hbar;
        let weights: Vec<f64> = (0..=n)
            .map(|k| {
                let t = k as f64 * ac.dt;
                let w = (-(t / window).powi(2)).exp();
                if k == 0 || k == n { 0.5 * w } else { w }
            })
            .collect();
        let density = crate::par::map(energies, |&e| {
            let mut s = 0.0;
            let step = Complex64::from_polar(1.0, e * ac.dt / hbar);
            let mut ph = Complex64::new(1.0, 0.0);
            for (k, (&w, c)) in weights.iter().zip(&ac.values).enumerate() {
                if k % 256 == 0 {
                    ph = Complex64::from_polar(1.0, e * k as f64 * ac.dt / hbar);
                }
                s += w * (ph * c).re;
                ph *= step;
            }
            s * ac.dt / (PI * hbar)
        });
        Ok(Self { energies: energies.to_vec(), density, window, hbar, warnings })
    }

    /// Trapezoid integral of the density.
    pub fn total_weight(&self) -> f64 {
        self.energies
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(e, d)| 0.5 * (e[1] - e[0]) * (d[0] + d[1]))
            .sum()
    }

    /// Interior local maxima above `1e-6` of the largest value (quadrature
    /// noise in the empty stretches makes spurious ripples below that).
    fn local_maxima(&self) -> Vec<usize> {
        let d = &self.density;
        let floor = 1e-6 * d.iter().copied().fold(0.0, f64::max);
        (1..d.len().saturating_sub(1)).filter(|&i| d[i] > floor && d[i] > d[i - 1] && d[i] >= d[i + 1]).collect()
    }

    /// Peaks as sticks: log-parabolic interpolation through each local
    /// maximum and its neighbours (exact for an isolated Gaussian line).
    /// Meaningful when the window is long compared with `ħ/(level spacing)`.
    pub fn sticks(&self, min_weight: f64) -> Vec<Stick> {
        let height_to_weight = 2.0 * PI * self.hbar / (PI.sqrt() * self.window);
        let mut out = Vec::new();
        for i in self.local_maxima() {
            let (y0, y1, y2) = (self.density[i - 1], self.density[i], self.density[i + 1]);
            if y0 <= 0.0 || y2 <= 0.0 {
                continue;
            }
            let (l0, l1, l2) = (y0.ln(), y1.ln(), y2.ln());
            let h = self.energies[i + 1] - self.energies[i];
            let curv = l0 - 2.0 * l1 + l2;
            let (shift, peak) = if curv < 0.0 {
                let s = 0.5 * (l0 - l2) / curv;
                (s, l1 - 0.25 * (l0 - l2) * s)
            } else {
                (0.0, l1)
            };
            let weight = peak.exp() * height_to_weight;
            if weight >= min_weight {
                out.push(Stick { energy: self.energies[i] + shift * h, weight });
            }
        }
        out
    }

    /// Local maxima with their weight integrated between the flanking
    /// minima.
    pub fn bands(&self) -> Vec<Band> {
        let maxima = self.local_maxima();
        let d = &self.density;
        let e = &self.energies;
        let mut out = Vec::new();
        for &i in &maxima {
            let mut lo = i;
            while lo > 0 && d[lo - 1] < d[lo] {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < d.len() && d[hi + 1] < d[hi] {
                hi += 1;
            }
            let weight: f64 = (lo..hi).map(|k| 0.5 * (e[k + 1] - e[k]) * (d[k] + d[k + 1])).sum();
            let center = if i > 0 && i + 1 < d.len() {
                let curv = d[i - 1] - 2.0 * d[i] + d[i + 1];
                if curv < 0.0 { e[i] + 0.5 * (d[i - 1] - d[i + 1]) / curv * (e[i + 1] - e[i]) } else { e[i] }
            } else {
                e[i]
            };
            out.push(Band { center, weight, lower: e[lo], upper: e[hi] });
        }
        out
    }
}

/// Uniform energy grid.
pub fn energy_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
