//! The Poincaré section `R = R_e(θ)` in canonical coordinates.
//!
//! The point transformation `ρ = R − R_e(θ)`, `ψ = θ` is generated by
//! `F₂ = P_ρ (R − R_e(θ)) + θ P_ψ`, which gives `P_ρ = P_R` and
//! `P_ψ = P_θ + R_e'(θ) P_R`. The map `(ψ, P_ψ) → (ψ', P_ψ')` is then
//! area-preserving.

use super::integrator::{identity, State, Tangent};
use super::Dynamics;
use crate::error::Coordinate;
use crate::pes::fold_theta;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SectionPoint {
    pub psi: f64,
    pub p_psi: f64,
}

impl SectionPoint {
    pub fn new(psi: f64, p_psi: f64) -> Self {
        Self { psi, p_psi }
    }
}

/// Which sign of `d(R − R_e)/dt` counts as a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    Outward,
    Inward,
}

impl CrossingDirection {
    fn sign(self) -> f64 {
        match self {
            CrossingDirection::Outward => 1.0,
            CrossingDirection::Inward => -1.0,
        }
    }
}

/// A located section crossing.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    /// Time since the start of the search.
    pub t: f64,
    pub state: State,
    /// Tangent map from the starting state, when requested.
    pub tangent: Option<Tangent>,
}

const POLISH_TOL: f64 = 1e-12;
const POLISH_MAX: usize = 12;

impl Dynamics {
    /// `(g, dg/dt)` with `g = R − R_e(θ)`.
    pub fn section_function(&self, x: &State) -> (f64, f64) {
        let (re, slope, _) = self.path.eval(x[1]);
        let b = self.masses.bend(x[0]);
        (x[0] - re, x[2] / self.masses.mu1 - slope * 2.0 * b * x[3])
    }

    /// Section coordinates of a phase point lying on the section, θ folded
    /// onto [0, π].
    pub fn to_section(&self, x: &State) -> SectionPoint {
        let slope = self.path.slope(x[1]);
        let p_psi = x[3] + slope * x[2];
        let (psi, sign) = fold_theta(x[1]);
        SectionPoint { psi, p_psi: sign * p_psi }
    }

    /// Phase point on the section at energy `e` with the configured
    /// crossing direction.
    pub fn lift(&self, p: SectionPoint, e: f64) -> Result<State> {
        let (r, a, _) = self.path.eval(p.psi);
        self.surface.check_domain(r, p.psi.clamp(0.0, std::f64::consts::PI))?;
        let b = self.masses.bend(r);
        let v = self.surface.value(r, p.psi);
        // (1/2μ₁ + B a²) P_R² − 2 B a P_ψ P_R + (B P_ψ² + V − E) = 0
        let qa = 0.5 / self.masses.mu1 + b * a * a;
        let qb = -2.0 * b * a * p.p_psi;
        let qc = b * p.p_psi * p.p_psi + v - e;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            // kinetic energy available after the minimum over P_R
            return Err(Error::Forbidden { psi: p.psi, kinetic: -disc / (4.0 * qa) });
        }
        let root = disc.sqrt();
        let pr = match self.direction {
            CrossingDirection::Outward => (-qb + root) / (2.0 * qa),
            CrossingDirection::Inward => (-qb - root) / (2.0 * qa),
        };
        Ok([r, p.psi, pr, p.p_psi - a * pr])
    }

    fn check_state(&self, x: &State, t: f64) -> Result<()> {
        let (lo, hi) = self.surface.r_range();
        if !(x[0] >= lo && x[0] <= hi) || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::DomainExit { t, coord: Coordinate::R, value: x[0] });
        }
        Ok(())
    }

    /// Propagates from `x` to the next crossing in the configured direction.
    /// A start exactly on the section is not counted.
    pub fn next_crossing(&self, x: &State, with_tangent: bool) -> Result<Crossing> {
        let integ = self.integrator();
        let sgn = self.direction.sign();
        let h = self.step;
        let mut cur = *x;
        let mut jac = identity();
        let (mut g, mut gd) = self.section_function(&cur);
        g *= sgn;
        gd *= sgn;
        let mut t = 0.0;
        while t < self.max_return_time {
            let mut next = cur;
            let mut jnext = jac;
            if with_tangent {
                integ.step_tangent(&mut next, &mut jnext, h);
            } else {
                integ.step(&mut next, h);
            }
            self.check_state(&next, t + h)?;
            let (g1, gd1) = self.section_function(&next);
            let (g1, gd1) = (sgn * g1, sgn * gd1);
            if g < 0.0 && g1 >= 0.0 {
                let tau = hermite_root(g, gd, g1, gd1, h);
                return self.polish(&cur, &jac, t, tau, with_tangent);
            }
            cur = next;
            jac = jnext;
            g = g1;
            gd = gd1;
            t += h;
        }
        Err(Error::Escape { budget: self.max_return_time })
    }

    /// Newton iteration on the partial-step length τ.
    fn polish(&self, x0: &State, j0: &Tangent, t0: f64, mut tau: f64, with_tangent: bool) -> Result<Crossing> {
        let integ = self.integrator();
        let mut out = (*x0, *j0);
        for _ in 0..POLISH_MAX {
            let mut x = *x0;
            let mut j = *j0;
            if with_tangent {
                integ.step_tangent(&mut x, &mut j, tau);
            } else {
                integ.step(&mut x, tau);
            }
            let (g, gd) = self.section_function(&x);
            out = (x, j);
            if g.abs() <= POLISH_TOL || gd == 0.0 {
                break;
            }
            tau -= g / gd;
        }
        Ok(Crossing { t: t0 + tau, state: out.0, tangent: with_tangent.then_some(out.1) })
    }

    /// One iterate of the section map at energy `e`.
    pub fn poincare(&self, p: SectionPoint, e: f64) -> Result<SectionPoint> {
        let x = self.lift(p, e)?;
        let c = self.next_crossing(&x, false)?;
        Ok(self.to_section(&c.state))
    }

    /// Section map together with its exact 2×2 Jacobian and return time.
    pub fn poincare_jacobian(&self, p: SectionPoint, e: f64) -> Result<(SectionPoint, [[f64; 2]; 2], f64)> {
        let x = self.lift(p, e)?;
        let dlift = self.lift_jacobian(&x);
        let c = self.next_crossing(&x, true)?;
        let phi = c.tangent.expect("tangent requested");
        let y = c.state;
        // project the flow Jacobian along the vector field onto the section
        let f = self.integrator().vector_field(&y);
        let (_, slope, _) = self.path.eval(y[1]);
        let grad_g = [1.0, -slope, 0.0, 0.0];
        let gf: f64 = (0..4).map(|i| grad_g[i] * f[i]).sum();
        let mut proj = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                proj[i][k] = if i == k { 1.0 } else { 0.0 } - f[i] * grad_g[k] / gf;
            }
        }
        let (_, a, a2) = self.path.eval(y[1]);
        let dproj = [[0.0, 1.0, 0.0, 0.0], [0.0, a2 * y[2], a, 1.0]];
        let m = super::integrator::mat_mul(&proj, &phi);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for jx in 0..2 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        s += dproj[i][k] * m[k][l] * dlift[l][jx];
                    }
                }
                out[i][jx] = s;
            }
        }
        let mut q = self.to_section(&y);
        let (_, sign) = fold_theta(y[1]);
        if sign < 0.0 {
            // folding is (ψ, P_ψ) → (−ψ, −P_ψ) mod 2π, a rotation by π
            for row in out.iter_mut() {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
        }
        q.psi = q.psi.clamp(0.0, std::f64::consts::PI);
        Ok((q, out, c.t))
    }

    /// ∂(state)/∂(ψ, P_ψ) of the lift at fixed energy.
    fn lift_jacobian(&self, x: &State) -> [[f64; 2]; 4] {
        let [r, t, pr, pt] = *x;
        let (_, a, a2) = self.path.eval(t);
        let d = self.surface.derivs(r, t);
        let b = self.masses.bend(r);
        let (db, _) = self.masses.bend_derivs(r);
        let grad_h = [d.v_r + db * pt * pt, d.v_t, pr / self.masses.mu1, 2.0 * b * pt];
        // ∂x/∂ψ = (a, 1, u, −a₂ P_R − a u) with ∇H·∂x/∂ψ = 0
        let base = grad_h[0] * a + grad_h[1] - grad_h[3] * a2 * pr;
        let coef = grad_h[2] - grad_h[3] * a;
        let u = -base / coef;
        // ∂x/∂P_ψ = (0, 0, w, 1 − a w)
        let w = -grad_h[3] / coef;
        [[a, 0.0], [1.0, 0.0], [u, w], [-a2 * pr - a * u, 1.0 - a * w]]
    }
}

/// Root in `[0, h]` of the cubic Hermite interpolant through `(0, g0, d0)`
/// and `(h, g1, d1)`, with `g0 < 0 ≤ g1`.
fn hermite_root(g0: f64, d0: f64, g1: f64, d1: f64, h: f64) -> f64 {
    let eval = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * g0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * g1
            + (s3 - s2) * h * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) * h
}
