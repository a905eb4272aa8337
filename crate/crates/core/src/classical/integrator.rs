//! Eighth-order symmetric splitting integrator for
//! `H = P_R²/2μ₁ + B(R) P_θ² + V(R, θ)`.
//!
//! The Hamiltonian splits into three exactly solvable pieces:
//!
//! * `A = P_R²/2μ₁`: R drifts;
//! * `K = B(R) P_θ²`: θ drifts at the rate `2B(R)P_θ` while P_R is pushed
//!   by `−B'(R) P_θ²` (R and P_θ are constants of this flow);
//! * `V(R, θ)`: momentum kick.
//!
//! The symmetric Strang product `A(h/2) K(h/2) V(h) K(h/2) A(h/2)` is
//! composed with the 15-stage Kahan–Li coefficients. Each piece's Jacobian
//! is exact, so the propagated tangent map is the exact derivative of the
//! discrete flow and stays symplectic to round-off.

use crate::pes::{MassParameters, PotentialSurface};

/// Phase-space state `[R, θ, P_R, P_θ]`.
pub type State = [f64; 4];
pub type Tangent = [[f64; 4]; 4];

const KAHAN_LI_8: [f64; 15] = [
    0.741_670_364_350_612_953_448_227_80,
    -0.409_100_825_800_031_593_997_300_10,
    0.190_754_710_296_238_379_953_876_26,
    -0.573_862_471_116_082_266_656_387_73,
    0.299_064_181_303_655_923_844_463_54,
    0.334_624_918_245_298_183_784_957_98,
    0.315_293_092_396_766_596_632_056_66,
    -0.796_887_939_352_916_354_019_788_84,
    0.315_293_092_396_766_596_632_056_66,
    0.334_624_918_245_298_183_784_957_98,
    0.299_064_181_303_655_923_844_463_54,
    -0.573_862_471_116_082_266_656_387_73,
    0.190_754_710_296_238_379_953_876_26,
    -0.409_100_825_800_031_593_997_300_10,
    0.741_670_364_350_612_953_448_227_80,
];

pub fn identity() -> Tangent {
    let mut j = [[0.0; 4]; 4];
    for (i, row) in j.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    j
}

/// Left-multiplies `j` by the elementary update `row_i += Σ_k c_k row_k`.
#[inline]
fn row_axpy(j: &mut Tangent, i: usize, coeffs: &[(usize, f64)]) {
    let mut add = [0.0; 4];
    for &(k, c) in coeffs {
        for col in 0..4 {
            add[col] += c * j[k][col];
        }
    }
    for col in 0..4 {
        j[i][col] += add[col];
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator<'a> {
    pub surface: &'a PotentialSurface,
    pub masses: &'a MassParameters,
}

impl<'a> Integrator<'a> {
    pub fn new(surface: &'a PotentialSurface, masses: &'a MassParameters) -> Self {
        Self { surface, masses }
    }

    pub fn energy(&self, x: &State) -> f64 {
        let [r, t, pr, pt] = *x;
        pr * pr / (2.0 * self.masses.mu1) + self.masses.bend(r) * pt * pt + self.surface.value(r, t)
    }

    /// Hamilton's equations.
    pub fn vector_field(&self, x: &State) -> State {
        let [r, t, pr, pt] = *x;
        let d = self.surface.derivs(r, t);
        let b = self.masses.bend(r);
        let (db, _) = self.masses.bend_derivs(r);
        [pr / self.masses.mu1, 2.0 * b * pt, -d.v_r - db * pt * pt, -d.v_t]
    }

    #[inline]
    fn drift_r(&self, x: &mut State, tau: f64, j: Option<&mut Tangent>) {
        let c = tau / self.masses.mu1;
        x[0] += c * x[2];
        if let Some(j) = j {
            row_axpy(j, 0, &[(2, c)]);
        }
    }

    #[inline]
    fn drift_bend(&self, x: &mut State, tau: f64, j: Option<&mut Tangent>) {
        let (r, pt) = (x[0], x[3]);
        let b = self.masses.bend(r);
        let (db, ddb) = self.masses.bend_derivs(r);
        x[1] += 2.0 * b * pt * tau;
        x[2] -= db * pt * pt * tau;
        if let Some(j) = j {
            // both rows depend only on (R, P_θ), which this flow leaves fixed
            let r_row = j[0];
            let pt_row = j[3];
            for col in 0..4 {
                j[1][col] += 2.0 * tau * (db * pt * r_row[col] + b * pt_row[col]);
                j[2][col] -= tau * (ddb * pt * pt * r_row[col] + 2.0 * db * pt * pt_row[col]);
            }
        }
    }

    #[inline]
    fn kick(&self, x: &mut State, tau: f64, j: Option<&mut Tangent>) {
        let d = self.surface.derivs(x[0], x[1]);
        x[2] -= d.v_r * tau;
        x[3] -= d.v_t * tau;
        if let Some(j) = j {
            let r_row = j[0];
            let t_row = j[1];
            for col in 0..4 {
                j[2][col] -= tau * (d.v_rr * r_row[col] + d.v_rt * t_row[col]);
                j[3][col] -= tau * (d.v_rt * r_row[col] + d.v_tt * t_row[col]);
            }
        }
    }

    #[inline]
    fn strang(&self, x: &mut State, h: f64, mut j: Option<&mut Tangent>) {
        self.drift_r(x, 0.5 * h, j.as_deref_mut());
        self.drift_bend(x, 0.5 * h, j.as_deref_mut());
        self.kick(x, h, j.as_deref_mut());
        self.drift_bend(x, 0.5 * h, j.as_deref_mut());
        self.drift_r(x, 0.5 * h, j);
    }

    /// One eighth-order step of size `h` (negative `h` runs backwards).
    pub fn step(&self, x: &mut State, h: f64) {
        for g in KAHAN_LI_8 {
            self.strang(x, g * h, None);
        }
    }

    /// Step that also advances the tangent map `j ← DΦ_h · j`.
    pub fn step_tangent(&self, x: &mut State, j: &mut Tangent, h: f64) {
        for g in KAHAN_LI_8 {
            self.strang(x, g * h, Some(j));
        }
    }
}

pub fn mat_mul(a: &Tangent, b: &Tangent) -> Tangent {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for jx in 0..4 {
                c[i][jx] += a[i][k] * b[k][jx];
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_sum_to_one() {
        let s: f64 = KAHAN_LI_8.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let surface = PotentialSurface::surrogate("licn-surrogate").unwrap();
        let masses = MassParameters::licn();
        let integ = Integrator::new(&surface, &masses);
        let x0 = [4.5, 2.0, 3.0, 10.0];
        let mut x = x0;
        let mut j = identity();
        for _ in 0..20 {
            integ.step_tangent(&mut x, &mut j, 5.0);
        }
        let eps = [1e-6, 1e-6, 1e-5, 1e-5];
        for col in 0..4 {
            let mut xp = x0;
            let mut xm = x0;
            xp[col] += eps[col];
            xm[col] -= eps[col];
            for _ in 0..20 {
                integ.step(&mut xp, 5.0);
                integ.step(&mut xm, 5.0);
            }
            for row in 0..4 {
                let fd = (xp[row] - xm[row]) / (2.0 * eps[col]);
                assert!((fd - j[row][col]).abs() < 1e-5 * (1.0 + fd.abs()), "{row},{col}: {fd} vs {}", j[row][col]);
            }
        }
    }
}
