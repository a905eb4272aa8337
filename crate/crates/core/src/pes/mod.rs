//! Potential energy surfaces, masses and the minimum-energy path.

mod coeff_file;
mod legendre;
mod mep;
mod spline;
mod surrogate;

pub use coeff_file::{load_coefficients, parse_coefficients, write_coefficients};
pub use legendre::{legendre_table, AnalyticForm, LegendreSeries, RadialTerm};
pub use mep::{minimum_energy_path, uniform_theta_grid, MinimumEnergyPath, PathSample};
pub(crate) use mep::fold_theta;
pub use spline::CubicSpline;
pub use surrogate::{ChannelSurface, HarmonicSurface};

use crate::error::Coordinate;
use crate::units::AMU_TO_ME;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Atomic masses (amu) and the derived reduced masses (electron masses).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MassParameters {
    pub m_li: f64,
    pub m_c: f64,
    pub m_n: f64,
    /// Li–CN reduced mass, a.u.
    pub mu1: f64,
    /// C–N reduced mass, a.u.
    pub mu2: f64,
    /// Frozen C–N distance, bohr.
    pub r_e: f64,
}

impl MassParameters {
    pub fn new(m_li: f64, m_c: f64, m_n: f64, r_e: f64) -> Result<Self> {
        for (name, v) in [("m_li", m_li), ("m_c", m_c), ("m_n", m_n), ("r_e", r_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Data(format!("{name} must be positive, got {v}")));
            }
        }
        let m_cn = m_c + m_n;
        Ok(Self {
            m_li,
            m_c,
            m_n,
            mu1: m_li * m_cn / (m_li + m_cn) * AMU_TO_ME,
            mu2: m_c * m_n / m_cn * AMU_TO_ME,
            r_e,
        })
    }

    /// ⁷Li, ¹²C, ¹⁴N with r_e = 2.186 bohr.
    pub fn licn() -> Self {
        Self::new(7.016003, 12.0, 14.003074, 2.186).expect("default masses are positive")
    }

    /// Bending coefficient `B(R) = ½(1/μ₁R² + 1/μ₂r_e²)` multiplying P_θ².
    #[inline]
    pub fn bend(&self, r: f64) -> f64 {
        0.5 * (1.0 / (self.mu1 * r * r) + 1.0 / (self.mu2 * self.r_e * self.r_e))
    }

    /// `dB/dR` and `d²B/dR²`.
    #[inline]
    pub fn bend_derivs(&self, r: f64) -> (f64, f64) {
        let r3 = r * r * r;
        (-1.0 / (self.mu1 * r3), 3.0 / (self.mu1 * r3 * r))
    }
}

/// Value plus first and second derivatives of V at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivs {
    pub v: f64,
    pub v_r: f64,
    pub v_t: f64,
    pub v_rr: f64,
    pub v_rt: f64,
    pub v_tt: f64,
}

impl Derivs {
    fn scaled(self, f: f64) -> Self {
        Self {
            v: self.v * f,
            v_r: self.v_r * f,
            v_t: self.v_t * f,
            v_rr: self.v_rr * f,
            v_rt: self.v_rt * f,
            v_tt: self.v_tt * f,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Series(LegendreSeries),
    Channel(ChannelSurface),
    Harmonic(HarmonicSurface),
}

/// An evaluable `V(R, θ)` on `R ∈ [r_min, r_max]`, `θ ∈ [0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSurface {
    backend: Backend,
    r_range: (f64, f64),
}

/// Names accepted by [`PotentialSurface::surrogate`].
pub const SURROGATE_NAMES: &[&str] = &["licn-surrogate", "harmonic", "curved-channel"];

impl PotentialSurface {
    pub fn new(backend: Backend, r_range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = r_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Data(format!("invalid R domain [{lo}, {hi}]")));
        }
        if let Backend::Series(s) = &backend {
            if let Some((a, b)) = s.table_range() {
                if lo < a || hi > b {
                    return Err(Error::Data(format!(
                        "R domain [{lo}, {hi}] exceeds tabulated range [{a}, {b}]"
                    )));
                }
            }
        }
        Ok(Self { backend, r_range })
    }

    /// Series surface whose R domain is the tabulated range (or `fallback`
    /// when every term is analytic).
    pub fn from_series(series: LegendreSeries, fallback: (f64, f64)) -> Result<Self> {
        let range = series.table_range().unwrap_or(fallback);
        Self::new(Backend::Series(series), range)
    }

    pub fn surrogate(name: &str) -> Result<Self> {
        match name {
            "licn-surrogate" => Self::new(Backend::Channel(ChannelSurface::licn()), (2.5, 7.0)),
            "harmonic" => Self::new(Backend::Harmonic(HarmonicSurface::standard()), (50.0, 70.0)),
            "curved-channel" => {
                Self::new(Backend::Channel(ChannelSurface::curved_test_channel()), (2.0, 6.0))
            }
            other => Err(Error::Data(format!(
                "unknown surrogate `{other}` (known: {})",
                SURROGATE_NAMES.join(", ")
            ))),
        }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.r_range
    }

    pub fn check_domain(&self, r: f64, theta: f64) -> Result<()> {
        let (lo, hi) = self.r_range;
        if !(r >= lo && r <= hi) {
            return Err(Error::Domain { coord: Coordinate::R, value: r, min: lo, max: hi });
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain { coord: Coordinate::Theta, value: theta, min: 0.0, max: PI });
        }
        Ok(())
    }

    pub fn evaluate(&self, r: f64, theta: f64) -> Result<f64> {
        self.check_domain(r, theta)?;
        Ok(self.derivs(r, theta).v)
    }

    /// `(∂V/∂R, ∂V/∂θ)`.
    pub fn gradient(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        self.check_domain(r, theta)?;
        let d = self.derivs(r, theta);
        Ok((d.v_r, d.v_t))
    }

    pub fn hessian(&self, r: f64, theta: f64) -> Result<[[f64; 2]; 2]> {
        self.check_domain(r, theta)?;
        let d = self.derivs(r, theta);
        Ok([[d.v_rr, d.v_rt], [d.v_rt, d.v_tt]])
    }

    /// Unchecked evaluation of V and its derivatives. θ may be any real
    /// number; surfaces built on cos θ are 2π-periodic and even.
    #[inline]
    pub fn derivs(&self, r: f64, theta: f64) -> Derivs {
        match &self.backend {
            Backend::Series(s) => s.derivs(r, theta),
            Backend::Channel(c) => c.derivs(r, theta),
            Backend::Harmonic(h) => h.derivs(r, theta),
        }
    }

    #[inline]
    pub fn value(&self, r: f64, theta: f64) -> f64 {
        self.derivs(r, theta).v
    }
}
