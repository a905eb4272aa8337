//! Periodic orbits as fixed points of the section map.

use super::integrator::{identity, State, Tangent};
use super::section::SectionPoint;
use super::Dynamics;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    /// Classifies by the trace of the reduced 2×2 monodromy.
    pub fn from_trace(trace: f64, tol: f64) -> Self {
        if (trace.abs() - 2.0).abs() <= tol {
            Stability::Marginal
        } else if trace.abs() < 2.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// Point on the orbit where `P_R = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TurningPoint {
    /// Time after the section crossing that starts the orbit.
    pub t: f64,
    pub state: State,
    /// Outer (R maximum) rather than inner turning point.
    pub outer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OrbitOptions {
    /// Convergence threshold on `|P(z) − z|∞`.
    pub tol: f64,
    pub max_iter: usize,
    /// Band around |tr M| = 2 classified as marginal.
    pub marginal_tol: f64,
    /// Launch wavepackets from the outer turning point (else the inner one).
    pub outer_turning_point: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 40, marginal_tol: 1e-6, outer_turning_point: true }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodicOrbit {
    pub energy: f64,
    pub section: SectionPoint,
    pub period: f64,
    /// Phase point at the section crossing.
    pub initial: State,
    /// Full 4×4 monodromy over one period.
    pub monodromy: Tangent,
    /// Jacobian of the section map at the fixed point.
    pub reduced: [[f64; 2]; 2],
    /// Trace of `reduced`; equals trace(monodromy) − 2.
    pub trace: f64,
    pub stability: Stability,
    /// Largest multiplier modulus.
    pub multiplier: f64,
    /// `ln|Λ|/T` (zero unless unstable).
    pub lyapunov: f64,
    /// Loop action `∮ p·dq`.
    pub action: f64,
    pub turning_point: Option<TurningPoint>,
    /// Turning points plus conjugate points of the transverse Jacobi field
    /// over one period.
    pub maslov: u32,
    pub residual: f64,
    pub iterations: usize,
}

impl PeriodicOrbit {
    /// `∮ p·dq / 2π`.
    pub fn reduced_action(&self) -> f64 {
        self.action / (2.0 * std::f64::consts::PI)
    }

    pub fn det_reduced(&self) -> f64 {
        self.reduced[0][0] * self.reduced[1][1] - self.reduced[0][1] * self.reduced[1][0]
    }
}

impl Dynamics {
    /// `samples` equally spaced phase points over one period, starting at
    /// the section crossing.
    pub fn orbit_path(&self, po: &PeriodicOrbit, samples: usize) -> Vec<State> {
        let dt = po.period / samples.max(1) as f64;
        let mut x = po.initial;
        let mut out = Vec::with_capacity(samples);
        for _ in 0..samples.max(1) {
            out.push(x);
            x = self.flow(&x, dt);
        }
        out
    }
}

fn residual(p: SectionPoint, q: SectionPoint) -> [f64; 2] {
    [q.psi - p.psi, q.p_psi - p.p_psi]
}

fn norm(f: [f64; 2]) -> f64 {
    f[0].abs().max(f[1].abs())
}

/// Damped Newton iteration for a fixed point of the section map at energy
/// `e`, followed by the orbit's stability, action and turning point.
pub fn find_periodic_orbit(dyn_: &Dynamics, guess: SectionPoint, e: f64, opts: &OrbitOptions) -> Result<PeriodicOrbit> {
    let mut z = guess;
    let mut history = Vec::new();
    for it in 0..opts.max_iter {
        let (q, jac, _) = dyn_.poincare_jacobian(z, e)?;
        let f = residual(z, q);
        let r = norm(f);
        history.push(r);
        if r <= opts.tol {
            return characterize(dyn_, z, e, opts, r, it);
        }
        let a = [[jac[0][0] - 1.0, jac[0][1]], [jac[1][0], jac[1][1] - 1.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step = [
            -(a[1][1] * f[0] - a[0][1] * f[1]) / det,
            -(-a[1][0] * f[0] + a[0][0] * f[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = SectionPoint::new(z.psi + lambda * step[0], z.p_psi + lambda * step[1]);
            if let Ok(tq) = dyn_.poincare(trial, e) {
                if norm(residual(trial, tq)) < r || lambda < 0.02 {
                    z = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: history.len(), residuals: history })
}

/// Characterizes an orbit whose fixed point is already known (for instance
/// a fold located by continuation, where Newton's matrix is singular).
/// Fails unless the closure residual is within `tol`.
pub fn periodic_orbit_at(dyn_: &Dynamics, z: SectionPoint, e: f64, tol: f64, opts: &OrbitOptions) -> Result<PeriodicOrbit> {
    let q = dyn_.poincare(z, e)?;
    let r = norm(residual(z, q));
    if !(r <= tol) {
        return Err(Error::NoConvergence { iterations: 0, residuals: vec![r] });
    }
    characterize(dyn_, z, e, opts, r, 0)
}

fn characterize(
    dyn_: &Dynamics,
    z: SectionPoint,
    e: f64,
    opts: &OrbitOptions,
    residual: f64,
    iterations: usize,
) -> Result<PeriodicOrbit> {
    let x0 = dyn_.lift(z, e)?;
    let (_, reduced, _) = dyn_.poincare_jacobian(z, e)?;
    let c = dyn_.next_crossing(&x0, true)?;
    let period = c.t;
    let monodromy = c.tangent.expect("tangent requested");
    let trace = reduced[0][0] + reduced[1][1];
    let stability = Stability::from_trace(trace, opts.marginal_tol);
    let multiplier = if trace.abs() > 2.0 {
        let disc = (trace * trace - 4.0).sqrt();
        0.5 * (trace.abs() + disc)
    } else {
        1.0
    };
    let lyapunov = if stability == Stability::Unstable { multiplier.ln() / period } else { 0.0 };
    let action = loop_action(dyn_, &x0, period);
    let turning = turning_points(dyn_, &x0, period);
    let turning_point = turning
        .iter()
        .copied()
        .filter(|tp| tp.outer == opts.outer_turning_point)
        .max_by(|a, b| {
            let key = |tp: &TurningPoint| if tp.outer { tp.state[0] } else { -tp.state[0] };
            key(a).total_cmp(&key(b))
        });
    let maslov = turning.len() as u32
        + turning_point.map(|tp| conjugate_points(dyn_, &tp.state, period)).unwrap_or(0);
    Ok(PeriodicOrbit {
        energy: e,
        section: z,
        period,
        initial: x0,
        monodromy,
        reduced,
        trace,
        stability,
        multiplier,
        lyapunov,
        action,
        turning_point,
        maslov,
        residual,
        iterations,
    })
}

fn samples(dyn_: &Dynamics, period: f64) -> (usize, f64) {
    let n = ((period / dyn_.step).ceil() as usize).max(16) * 2;
    (n, period / n as f64)
}

/// `∮ p·dq = ∫ (P_R²/μ₁ + 2B P_θ²) dt`, trapezoid rule over one period
/// (spectrally accurate for a periodic integrand).
pub fn loop_action(dyn_: &Dynamics, x0: &State, period: f64) -> f64 {
    let (n, dt) = samples(dyn_, period);
    let integ = dyn_.integrator();
    let twice_kinetic = |x: &State| x[2] * x[2] / dyn_.masses.mu1 + 2.0 * dyn_.masses.bend(x[0]) * x[3] * x[3];
    let mut x = *x0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += twice_kinetic(&x);
        integ.step(&mut x, dt);
    }
    sum * dt
}

/// Zeros of `P_R` over one period.
pub fn turning_points(dyn_: &Dynamics, x0: &State, period: f64) -> Vec<TurningPoint> {
    let (n, dt) = samples(dyn_, period);
    let integ = dyn_.integrator();
    let mut out = Vec::new();
    let mut x = *x0;
    for i in 0..n {
        let mut y = x;
        integ.step(&mut y, dt);
        if x[2] != 0.0 && x[2].signum() != y[2].signum() {
            let (mut lo, mut hi) = (0.0, dt);
            let mut z = x;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                z = x;
                integ.step(&mut z, mid);
                if z[2].signum() == x[2].signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(TurningPoint { t: i as f64 * dt + 0.5 * (lo + hi), state: z, outer: x[2] > 0.0 });
        }
        x = y;
    }
    out
}

/// Sign changes of δθ over (0, T) for the Jacobi field started with
/// δθ = 0, δP_θ = 1 at `x0`.
fn conjugate_points(dyn_: &Dynamics, x0: &State, period: f64) -> u32 {
    let (n, dt) = samples(dyn_, period);
    let integ = dyn_.integrator();
    let mut x = *x0;
    let mut j = identity();
    let mut prev = 0.0_f64;
    let mut count = 0;
    for i in 0..n {
        integ.step_tangent(&mut x, &mut j, dt);
        let dth = j[1][3];
        if i > 0 && i + 1 < n && dth != 0.0 && prev != 0.0 && dth.signum() != prev.signum() {
            count += 1;
        }
        prev = dth;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::super::testutil::dynamics;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_stretch_orbit() {
        // separable oscillator: the pure stretch at θ = θ₀ is periodic with
        // period 2π/ω_R and loop action 2πE/ω_R
        let d = dynamics("harmonic");
        let hs = crate::pes::HarmonicSurface::standard();
        let omega = (hs.k_r / d.masses.mu1).sqrt();
        let e = 0.01;
        let po = find_periodic_orbit(&d, SectionPoint::new(hs.theta0 + 0.01, 0.0), e, &OrbitOptions::default()).unwrap();
        assert!((po.section.psi - hs.theta0).abs() < 1e-8);
        let t_exact = 2.0 * PI / omega;
        assert!((po.period - t_exact).abs() < 1e-6 * t_exact, "{} {}", po.period, t_exact);
        let s_exact = 2.0 * PI * e / omega;
        assert!((po.action - s_exact).abs() < 1e-6 * s_exact);
        assert!((po.det_reduced() - 1.0).abs() < 1e-8);
        let tr4: f64 = (0..4).map(|i| po.monodromy[i][i]).sum();
        assert!((tr4 - 2.0 - po.trace).abs() < 1e-7);
        assert_eq!(po.stability, Stability::Stable);
        let tp = po.turning_point.unwrap();
        assert!(tp.outer && tp.state[0] > hs.r0);
    }

    #[test]
    fn classification() {
        assert_eq!(Stability::from_trace(1.0, 1e-6), Stability::Stable);
        assert_eq!(Stability::from_trace(-2.5, 1e-6), Stability::Unstable);
        assert_eq!(Stability::from_trace(2.0 + 1e-8, 1e-6), Stability::Marginal);
    }
}
