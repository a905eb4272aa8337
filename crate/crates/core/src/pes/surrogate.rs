//! Analytic surrogate surfaces.
//!
//! The bundled `licn-surrogate` is a radial channel around a θ-dependent
//! equilibrium distance,
//!
//! ```text
//! V(R, θ) = U(x) + ½ K(x) (R − R₀(x))²,        x = cos θ
//! U(x)  = u_b (1 − x²) + u_a (1 + x)/2
//! K(x)  = k₀ (1 + β exp(−((x − x_c)/w)²))²
//! R₀(x) = r₀ + r₁ x
//! ```
//!
//! `U` has wells at θ = 0 and π (depths differ by `u_a`) separated by a
//! saddle at cos θ_s = u_a/(4u_b). The Gaussian bump in the radial force
//! constant makes the adiabatic bending potential `U + I·ω(θ)` of an
//! excited stretch develop a new minimum/maximum pair as the stretch action
//! `I` grows, which is the saddle–node birth of a stable/unstable pair of
//! near-radial periodic orbits. Because every θ-dependence goes through
//! cos θ, ∂V/∂θ vanishes on the linear configurations and the surface is
//! even in θ. The minimum-energy path is exactly `R₀(θ)`.

use super::Derivs;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelSurface {
    pub u_b: f64,
    pub u_a: f64,
    pub k0: f64,
    pub beta: f64,
    pub x_c: f64,
    pub width: f64,
    pub r0: f64,
    pub r1: f64,
}

impl ChannelSurface {
    /// Desk-scale stand-in for the LiNC/LiCN surface (hartree, bohr).
    pub fn licn() -> Self {
        Self {
            u_b: 3000.0 / crate::units::HARTREE_TO_CM1,
            u_a: 1500.0 / crate::units::HARTREE_TO_CM1,
            k0: 0.1,
            beta: 1.0,
            x_c: -0.766,
            width: 0.35,
            r0: 4.3,
            r1: 0.2,
        }
    }

    /// `V = (R − 4 − ½cos θ)² + 0.01·sin²θ`: separable-in-shape channel with
    /// a known minimum-energy path.
    pub fn curved_test_channel() -> Self {
        Self { u_b: 0.01, u_a: 0.0, k0: 2.0, beta: 0.0, x_c: 0.0, width: 1.0, r0: 4.0, r1: 0.5 }
    }

    pub(crate) fn derivs(&self, r: f64, theta: f64) -> Derivs {
        let (s, x) = theta.sin_cos();
        // x-derivatives of the building blocks
        let u_x = -2.0 * self.u_b * x + 0.5 * self.u_a;
        let u_xx = -2.0 * self.u_b;
        let z = (x - self.x_c) / self.width;
        let g = (-z * z).exp();
        let g_x = -2.0 * z * g / self.width;
        let g_xx = (4.0 * z * z - 2.0) * g / (self.width * self.width);
        let f = 1.0 + self.beta * g;
        let k = self.k0 * f * f;
        let k_x = 2.0 * self.k0 * f * self.beta * g_x;
        let k_xx = 2.0 * self.k0 * self.beta * (self.beta * g_x * g_x + f * g_xx);
        let r0_x = self.r1;
        let d = r - (self.r0 + self.r1 * x);

        let u = self.u_b * (1.0 - x * x) + 0.5 * self.u_a * (1.0 + x);
        let v = u + 0.5 * k * d * d;
        let v_x = u_x + 0.5 * k_x * d * d - k * d * r0_x;
        let v_xx = u_xx + 0.5 * k_xx * d * d - 2.0 * k_x * d * r0_x + k * r0_x * r0_x;
        let v_rx = k_x * d - k * r0_x;
        Derivs {
            v,
            v_r: k * d,
            v_t: -s * v_x,
            v_rr: k,
            v_rt: -s * v_rx,
            v_tt: s * s * v_xx - x * v_x,
        }
    }

    /// Equilibrium distance `R₀(θ)` and its θ-derivative.
    pub fn equilibrium(&self, theta: f64) -> (f64, f64) {
        (self.r0 + self.r1 * theta.cos(), -self.r1 * theta.sin())
    }
}

/// `V = ½k_R (R − R₀)² + ½k_θ (θ − θ₀)²`.
///
/// A solver test surface: separable and exactly harmonic, so it is not
/// symmetric about the linear configurations. Keep the wave functions and
/// trajectories away from θ = 0, π when using it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HarmonicSurface {
    pub k_r: f64,
    pub r0: f64,
    pub k_theta: f64,
    pub theta0: f64,
}

impl HarmonicSurface {
    /// Far-out equilibrium (R₀ = 60 bohr) so the 1/μ₁R² part of the bending
    /// coefficient barely varies across the radial ground states.
    pub fn standard() -> Self {
        Self { k_r: 0.1, r0: 60.0, k_theta: 0.02, theta0: std::f64::consts::FRAC_PI_2 }
    }

    pub(crate) fn derivs(&self, r: f64, theta: f64) -> Derivs {
        let dr = r - self.r0;
        let dt = theta - self.theta0;
        Derivs {
            v: 0.5 * self.k_r * dr * dr + 0.5 * self.k_theta * dt * dt,
            v_r: self.k_r * dr,
            v_t: self.k_theta * dt,
            v_rr: self.k_r,
            v_rt: 0.0,
            v_tt: self.k_theta,
        }
    }
}
