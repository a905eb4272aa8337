//! Scar functions: the packet filtered by a Gaussian time window at a
//! target energy,
//!
//! ```text
//! |ψ⟩ = ∫ dt e^{−t²/T_E²} e^{i(E − H)t/ħ} |φ(0)⟩,
//! ```
//!
//! accumulated as one Chebyshev series whose coefficients are the window
//! integrals of the propagator coefficients over `[−a T_E, a T_E]`.

use super::chebyshev::{bessel_j, terms_needed, Chebyshev, MomentRun};
use super::field::WaveField;
use super::hamiltonian::Hamiltonian;
use crate::classical::{PeriodicOrbit, Stability};
use crate::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ScarFunction {
    pub field: WaveField,
    /// Excitation number along the orbit.
    pub band: usize,
    /// Target energy.
    pub energy: f64,
    pub t_e: f64,
    /// `⟨ψ|H|ψ⟩`.
    pub mean_energy: f64,
}

/// Window length: `ln(S/ħ)/λ` for an unstable orbit (S the reduced
/// action, λ the Lyapunov rate); `multiplier · period` when the orbit is
/// stable or marginal, or when `S/ħ ≤ e` makes the logarithm degenerate.
pub fn ehrenfest_time(po: &PeriodicOrbit, hbar: f64, multiplier: f64) -> f64 {
    let fallback = multiplier * po.period;
    if po.stability != Stability::Unstable || po.lyapunov <= 0.0 {
        return fallback;
    }
    let ratio = po.reduced_action() / hbar;
    if ratio <= std::f64::consts::E {
        return fallback;
    }
    ratio.ln() / po.lyapunov
}

/// How the window `T_E` is chosen for each rung.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EhrenfestRule {
    /// [`ehrenfest_time`] with the given fallback multiplier.
    Logarithmic { marginal_multiplier: f64 },
    /// A fixed number of periods regardless of stability.
    Periods { multiplier: f64 },
}

impl Default for EhrenfestRule {
    fn default() -> Self {
        Self::Logarithmic { marginal_multiplier: 2.0 }
    }
}

impl EhrenfestRule {
    pub fn window(&self, po: &PeriodicOrbit, hbar: f64) -> f64 {
        match *self {
            Self::Logarithmic { marginal_multiplier } => ehrenfest_time(po, hbar, marginal_multiplier),
            Self::Periods { multiplier } => multiplier * po.period,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = match *self {
            Self::Logarithmic { marginal_multiplier } => marginal_multiplier,
            Self::Periods { multiplier } => multiplier,
        };
        if m > 0.0 && m.is_finite() {
            Ok(())
        } else {
            Err(Error::Contract(format!("window multiplier must be positive, got {m}")))
        }
    }
}

/// Real Chebyshev coefficients of the windowed filter (the filter of a
/// real symmetric H is real). Trapezoid rule on `[0, a T_E]` with the
/// `t → −t` symmetry folded in.
pub fn scar_coefficients(e_target: f64, t_e: f64, a: f64, center: f64, half_width: f64, hbar: f64) -> Vec<f64> {
    let t_max = a * t_e;
    let n_terms = terms_needed(half_width * t_max / hbar, 1e-17);
    let omega = (e_target - center) / hbar;
    let band = half_width / hbar + omega.abs();
    let steps = ((t_max * band / (0.45 * PI)).ceil() as usize).max(64);
    let dt = t_max / steps as f64;
    let mut even = vec![0.0; n_terms + 1];
    let mut odd = vec![0.0; n_terms + 1];
    for i in 0..=steps {
        let t = i as f64 * dt;
        let w = (-(t / t_e).powi(2)).exp() * if i == 0 || i == steps { 0.5 } else { 1.0 };
        let (s, c) = (omega * t).sin_cos();
        let j = bessel_j(half_width * t / hbar, n_terms);
        for k in 0..=n_terms {
            if k % 2 == 0 {
                even[k] += w * c * j[k];
            } else {
                odd[k] += w * s * j[k];
            }
        }
    }
    (0..=n_terms)
        .map(|k| {
            let base = if k == 0 { 1.0 } else { 2.0 } * 2.0 * dt;
            if k % 2 == 0 {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                base * sign * even[k]
            } else {
                let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                base * sign * odd[k]
            }
        })
        .collect()
}

/// Builds the scar function at `e_target` and returns the packet's
/// Chebyshev moments alongside (at least `min_moments` of them), so the
/// caller can form spectra without a second propagation.
pub fn scar_function(
    ham: &Hamiltonian,
    f0: &WaveField,
    e_target: f64,
    t_e: f64,
    band: usize,
    min_moments: usize,
) -> Result<(ScarFunction, MomentRun)> {
    if !(t_e > 0.0) {
        return Err(Error::Contract(format!("window T_E must be positive, got {t_e}")));
    }
    let cheb = Chebyshev::new(ham);
    let coeffs = scar_coefficients(e_target, t_e, 3.0, cheb.center, cheb.half_width, ham.hbar);
    let n = (coeffs.len() - 1).max(min_moments.div_ceil(2));
    let run = cheb.moments(f0, n, Some(&coeffs))?;
    let mut field = run.filtered.clone().expect("filter requested");
    field.normalize()?;
    let mean_energy = ham.expectation(&field);
    Ok((ScarFunction { field, band, energy: e_target, t_e, mean_energy }, run))
}
