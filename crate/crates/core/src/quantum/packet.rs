//! Gaussian packets launched on a periodic orbit, and grids sized for them.

use super::field::{GridSpec, WaveField};
use crate::classical::PeriodicOrbit;
use crate::pes::{fold_theta, MassParameters, PotentialSurface};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// How the packet's position spreads are chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WidthPolicy {
    /// Minimum-uncertainty state of the orbit frequency `ω = 2π/T` in both
    /// degrees of freedom: `σ_R² = ħ/(2μ₁ω)`, `σ_θ² = ħB(R)/ω`.
    Coherent,
    /// Fixed spreads (bohr, radians), independent of ħ.
    Fixed { sigma_r: f64, sigma_theta: f64 },
}

/// A Gaussian `exp(−ΔR²/4σ_R² − Δθ²/4σ_θ² + i(p_R ΔR + p_θ Δθ)/ħ)`; the
/// σ are standard deviations of `|ψ|²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PacketSpec {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
    pub sigma_r: f64,
    pub sigma_theta: f64,
}

impl PacketSpec {
    /// Packet at the orbit's launch turning point.
    pub fn on_orbit(po: &PeriodicOrbit, hbar: f64, masses: &MassParameters, policy: WidthPolicy) -> Result<Self> {
        let tp = po
            .turning_point
            .ok_or_else(|| Error::Contract("orbit has no turning point to launch from".into()))?;
        let [r, theta, p_r, p_theta] = tp.state;
        let (theta, sign) = fold_theta(theta);
        let (sigma_r, sigma_theta) = match policy {
            WidthPolicy::Coherent => {
                let omega = 2.0 * PI / po.period;
                ((hbar / (2.0 * masses.mu1 * omega)).sqrt(), (hbar * masses.bend(r) / omega).sqrt())
            }
            WidthPolicy::Fixed { sigma_r, sigma_theta } => (sigma_r, sigma_theta),
        };
        Ok(Self { r, theta, p_r, p_theta: sign * p_theta, sigma_r, sigma_theta })
    }

    /// Samples and normalizes the packet; fails when more than `1e-8` of
    /// its mass lies outside the grid.
    pub fn build(&self, grid: GridSpec, hbar: f64) -> Result<WaveField> {
        if !(hbar > 0.0) || !(self.sigma_r > 0.0 && self.sigma_theta > 0.0) {
            return Err(Error::Contract("ħ and packet widths must be positive".into()));
        }
        let s = *self;
        let mut f = WaveField::from_fn(grid, hbar, |r, t| {
            let (dr, dt) = (r - s.r, t - s.theta);
            let amp = (-dr * dr / (4.0 * s.sigma_r * s.sigma_r) - dt * dt / (4.0 * s.sigma_theta * s.sigma_theta)).exp();
            Complex64::from_polar(amp, (s.p_r * dr + s.p_theta * dt) / hbar)
        });
        let exact = 2.0 * PI * s.sigma_r * s.sigma_theta;
        let tail = 1.0 - f.norm_sq() / exact;
        if tail.abs() > 1e-8 {
            return Err(Error::GridTooSmall(format!(
                "packet mass outside or unresolved on the grid: {tail:.3e}"
            )));
        }
        f.normalize()?;
        Ok(f)
    }
}

/// Builds the launch packet for `po` at `hbar`.
pub fn build_packet(
    po: &PeriodicOrbit,
    hbar: f64,
    grid: GridSpec,
    masses: &MassParameters,
    policy: WidthPolicy,
) -> Result<WaveField> {
    PacketSpec::on_orbit(po, hbar, masses, policy)?.build(grid, hbar)
}

/// How a grid is sized for a given energy and ħ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridPolicy {
    /// Grid points per shortest local de Broglie wavelength.
    pub points_per_wavelength: f64,
    /// The R interval covers every point with `V ≤ e_max + margin·(e_max − V_min)`.
    pub margin: f64,
    /// Potential cap, as `e_max + cap·(e_max − V_min)`.
    pub cap: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { points_per_wavelength: 4.0, margin: 0.6, cap: 1.0 }
    }
}

impl GridPolicy {
    /// Grid resolving every state up to `e_max` at `hbar`, plus the cap
    /// value for the potential.
    pub fn grid(&self, surface: &PotentialSurface, masses: &MassParameters, e_max: f64, hbar: f64) -> Result<(GridSpec, f64)> {
        let (lo, hi) = surface.r_range();
        let nr_scan = 1200;
        let nt_scan = 181;
        let mut v_min = f64::INFINITY;
        let rs: Vec<f64> = (0..=nr_scan).map(|i| lo + (hi - lo) * i as f64 / nr_scan as f64).collect();
        let row_min: Vec<f64> = rs
            .iter()
            .map(|&r| (0..nt_scan).map(|m| surface.value(r, PI * m as f64 / (nt_scan - 1) as f64)).fold(f64::INFINITY, f64::min))
            .collect();
        for &v in &row_min {
            v_min = v_min.min(v);
        }
        if !(e_max > v_min) {
            return Err(Error::Contract(format!("e_max {e_max} is below the potential minimum {v_min}")));
        }
        let limit = e_max + self.margin * (e_max - v_min);
        let inside: Vec<usize> = (0..rs.len()).filter(|&i| row_min[i] <= limit).collect();
        let (i0, i1) = (inside[0], *inside.last().expect("non-empty: e_max > V_min"));
        let r_min = rs[i0.saturating_sub(1)].max(lo);
        let r_max = rs[(i1 + 1).min(nr_scan)].min(hi);
        let cap = e_max + self.cap * (e_max - v_min);
        let kin = cap - v_min;
        let p_r = (2.0 * masses.mu1 * kin).sqrt();
        let b_min = masses.bend(r_max);
        let p_t = (kin / b_min).sqrt();
        let n_r = (self.points_per_wavelength * (r_max - r_min) * p_r / (2.0 * PI * hbar)).ceil() as usize;
        let n_theta = (self.points_per_wavelength * PI * p_t / (2.0 * PI * hbar)).ceil() as usize;
        let n_r = smooth_at_least(n_r.max(8) + 1) - 1;
        let n_theta = smooth_at_least(n_theta.max(8));
        Ok((GridSpec::new(n_r, n_theta, r_min, r_max)?, cap))
    }
}

/// Smallest `m ≥ n` whose only prime factors are 2, 3 and 5.
fn smooth_at_least(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut k = m;
            for p in [2, 3, 5] {
                while k % p == 0 {
                    k /= p;
                }
            }
            k == 1
        })
        .expect("5-smooth numbers are unbounded")
}
