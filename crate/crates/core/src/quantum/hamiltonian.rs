//! `H = P_R²/2μ₁ + B(R) P_θ² + V(R, θ)` on a [`GridSpec`].
//!
//! Both kinetic operators are diagonal in their transform bases (DST-I in
//! R, DCT-II in θ) and are applied with fast transforms. `B(R)` multiplies
//! whole rows and commutes with the θ operator, so the product needs no
//! symmetrization.

use super::field::{GridSpec, WaveField};
use crate::pes::{MassParameters, PotentialSurface};
use crate::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2};
use rustdct::{Dst1, TransformType2And3};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
struct Transforms {
    sine: Arc<dyn Dst1<f64>>,
    cosine: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for Transforms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Transforms")
    }
}

/// Scratch buffers for [`Hamiltonian::apply_plane`].
#[derive(Debug, Clone)]
pub struct Workspace {
    cols: Array2<f64>,
    buf: Vec<f64>,
    sine_scratch: Vec<f64>,
    cosine_scratch: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub grid: GridSpec,
    pub hbar: f64,
    pub masses: MassParameters,
    /// Kinetic eigenvalues with the inverse-transform normalization folded in.
    lam_r: Vec<f64>,
    lam_t: Vec<f64>,
    transforms: Transforms,
    bend: Array1<f64>,
    pot: Array2<f64>,
    e_min: f64,
    e_max: f64,
}

/// `Aᵀ diag(λ) B` with the transforms given by rows.
fn similarity(a: &Array2<f64>, b: &Array2<f64>, lambda: &[f64]) -> Array2<f64> {
    let mut scaled = b.clone();
    for (mut row, &l) in scaled.rows_mut().into_iter().zip(lambda) {
        row *= l;
    }
    a.t().dot(&scaled)
}

impl Hamiltonian {
    /// Builds the operator. `v_cap` clips the potential from above, which
    /// bounds the spectrum without touching the classically allowed region.
    pub fn new(
        surface: &PotentialSurface,
        masses: &MassParameters,
        grid: GridSpec,
        hbar: f64,
        v_cap: Option<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Contract(format!("ħ must be positive, got {hbar}")));
        }
        let (lo, hi) = surface.r_range();
        if grid.r_min < lo || grid.r_max > hi {
            return Err(Error::Domain {
                coord: crate::error::Coordinate::R,
                value: if grid.r_min < lo { grid.r_min } else { grid.r_max },
                min: lo,
                max: hi,
            });
        }
        let (nr, nt) = (grid.n_r, grid.n_theta);
        let len = grid.r_max - grid.r_min;
        let lam_r: Vec<f64> = (1..=nr)
            .map(|k| {
                let p = hbar * k as f64 * PI / len;
                p * p / (2.0 * masses.mu1)
            })
            .collect();
        let lam_t: Vec<f64> = (0..nt).map(|k| (hbar * k as f64).powi(2)).collect();
        let mut planner = rustdct::DctPlanner::new();
        let transforms = Transforms { sine: planner.plan_dst1(nr), cosine: planner.plan_dct2(nt) };
        let bend = Array1::from_shape_fn(nr, |j| masses.bend(grid.r(j)));
        let cap = v_cap.unwrap_or(f64::INFINITY);
        let pot = Array2::from_shape_fn((nr, nt), |(j, m)| surface.value(grid.r(j), grid.theta(m)).min(cap));
        let v_min = pot.iter().copied().fold(f64::INFINITY, f64::min);
        let v_max = pot.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let b_max = bend.iter().copied().fold(0.0, f64::max);
        let e_min = v_min;
        let e_max = v_max + lam_r[nr - 1] + b_max * lam_t[nt - 1];
        let pad = 1e-3 * (e_max - e_min);
        Ok(Self {
            grid,
            hbar,
            masses: *masses,
            lam_r: lam_r.iter().map(|l| l * 2.0 / (nr + 1) as f64).collect(),
            lam_t: lam_t.iter().map(|l| l * 2.0 / nt as f64).collect(),
            transforms,
            bend,
            pot,
            e_min: e_min - pad,
            e_max: e_max + pad,
        })
    }

    /// Guaranteed enclosure of the discrete spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        (self.e_min, self.e_max)
    }

    pub fn potential(&self) -> &Array2<f64> {
        &self.pot
    }

    pub fn workspace(&self) -> Workspace {
        let t = &self.transforms;
        Workspace {
            cols: Array2::zeros((self.grid.n_theta, self.grid.n_r)),
            buf: vec![0.0; self.grid.n_theta],
            sine_scratch: vec![0.0; t.sine.get_scratch_len()],
            cosine_scratch: vec![0.0; t.cosine.get_scratch_len()],
        }
    }

    /// `y ← (H − shift) x / scale` on one real plane.
    pub fn apply_plane(&self, x: ArrayView2<f64>, mut y: ArrayViewMut2<f64>, ws: &mut Workspace, shift: f64, scale: f64) {
        let inv = 1.0 / scale;
        let Workspace { cols, buf, sine_scratch, cosine_scratch } = ws;
        let t = &self.transforms;
        for (j, (mut yr, (xr, vr))) in y.rows_mut().into_iter().zip(x.rows().into_iter().zip(self.pot.rows())).enumerate() {
            for (b, &v) in buf.iter_mut().zip(&xr) {
                *b = v;
            }
            t.cosine.process_dct2_with_scratch(buf, cosine_scratch);
            for (b, &l) in buf.iter_mut().zip(&self.lam_t) {
                *b *= l;
            }
            t.cosine.process_dct3_with_scratch(buf, cosine_scratch);
            let bend = self.bend[j];
            for (((yv, &k), &xv), &v) in yr.iter_mut().zip(buf.iter()).zip(&xr).zip(&vr) {
                *yv = (bend * k + (v - shift) * xv) * inv;
            }
        }
        cols.assign(&x.t());
        for mut col in cols.rows_mut() {
            let c = col.as_slice_mut().expect("workspace rows are contiguous");
            // the FFT-backed DST-I never writes two of its scratch entries
            sine_scratch.fill(0.0);
            t.sine.process_dst1_with_scratch(c, sine_scratch);
            for (v, &l) in c.iter_mut().zip(&self.lam_r) {
                *v *= l;
            }
            sine_scratch.fill(0.0);
            t.sine.process_dst1_with_scratch(c, sine_scratch);
        }
        y.scaled_add(inv, &cols.t());
    }

    /// Kinetic matrices `(T_R, T_θ)` in the point basis.
    fn kinetic_matrices(&self) -> (Array2<f64>, Array2<f64>) {
        let (nr, nt) = (self.grid.n_r, self.grid.n_theta);
        let sine = Array2::from_shape_fn((nr, nr), |(k, j)| {
            ((k + 1) as f64 * PI * (j + 1) as f64 / (nr + 1) as f64).sin()
        });
        let cosine = Array2::from_shape_fn((nt, nt), |(k, m)| (k as f64 * PI * (m as f64 + 0.5) / nt as f64).cos());
        let mut half = cosine.clone();
        half.row_mut(0).mapv_inplace(|v| 0.5 * v);
        (similarity(&sine, &sine, &self.lam_r), similarity(&half, &cosine, &self.lam_t))
    }

    pub fn apply(&self, f: &WaveField) -> WaveField {
        let mut out = WaveField::zeros(f.grid, f.hbar);
        let mut ws = self.workspace();
        self.apply_plane(f.re.view(), out.re.view_mut(), &mut ws, 0.0, 1.0);
        self.apply_plane(f.im.view(), out.im.view_mut(), &mut ws, 0.0, 1.0);
        out
    }

    /// `⟨f|H|f⟩ / ⟨f|f⟩`.
    pub fn expectation(&self, f: &WaveField) -> f64 {
        f.inner(&self.apply(f)).re / f.norm_sq()
    }

    /// Dense matrix in the point basis, index `j·N_θ + m`.
    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let (nr, nt) = (self.grid.n_r, self.grid.n_theta);
        let n = nr * nt;
        let (kin_r, kin_theta) = self.kinetic_matrices();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        for j in 0..nr {
            for jp in 0..nr {
                let k = kin_r[[j, jp]];
                for m in 0..nt {
                    h[(j * nt + m, jp * nt + m)] += k;
                }
            }
            for m in 0..nt {
                for mp in 0..nt {
                    h[(j * nt + m, j * nt + mp)] += self.bend[j] * kin_theta[[m, mp]];
                }
                h[(j * nt + m, j * nt + m)] += self.pot[[j, m]];
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pes::{Backend, ChannelSurface, HarmonicSurface};
    use num_complex::Complex64;

    fn flat() -> PotentialSurface {
        let c = ChannelSurface { u_b: 0.0, u_a: 0.0, k0: 0.0, beta: 0.0, x_c: 0.0, width: 1.0, r0: 3.0, r1: 0.0 };
        PotentialSurface::new(Backend::Channel(c), (1.0, 10.0)).unwrap()
    }

    #[test]
    fn sine_modes_are_eigenfields() {
        let m = MassParameters::licn();
        let g = GridSpec::new(31, 8, 2.0, 6.0).unwrap();
        let h = Hamiltonian::new(&flat(), &m, g, 1.0, None).unwrap();
        let k = 3.0 * PI / 4.0;
        let f = WaveField::from_fn(g, 1.0, |r, _| Complex64::new((k * (r - 2.0)).sin(), 0.0));
        let hf = h.apply(&f);
        let e = k * k / (2.0 * m.mu1);
        for (a, b) in hf.re.iter().zip(f.re.iter()) {
            assert!((a - e * b).abs() < 1e-12);
        }
        // a θ-constant field feels no bending kinetic energy
        let c = WaveField::from_fn(g, 1.0, |_, _| Complex64::new(1.0, 0.0));
        let hc = h.apply(&c);
        let only_theta = c.re.dot(&h.kinetic_matrices().1);
        assert!(only_theta.iter().all(|v: &f64| v.abs() < 1e-12));
        assert!(hc.im.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cosine_modes_carry_bending_energy() {
        let m = MassParameters::licn();
        let g = GridSpec::new(15, 24, 2.0, 6.0).unwrap();
        let h = Hamiltonian::new(&flat(), &m, g, 0.5, None).unwrap();
        let f = WaveField::from_fn(g, 0.5, |r, t| {
            Complex64::new((PI * (r - 2.0) / 4.0).sin() * (5.0 * t).cos(), 0.0)
        });
        let hf = h.apply(&f);
        for j in 0..15 {
            let r = g.r(j);
            let e = 0.25 * (PI / 4.0).powi(2) / (2.0 * m.mu1) + m.bend(r) * 0.25 * 25.0;
            for mm in 0..24 {
                assert!((hf.re[[j, mm]] - e * f.re[[j, mm]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_matches_apply_and_is_symmetric() {
        let s = PotentialSurface::surrogate("licn-surrogate").unwrap();
        let m = MassParameters::licn();
        let g = GridSpec::new(6, 5, 3.0, 5.5).unwrap();
        let h = Hamiltonian::new(&s, &m, g, 1.0, Some(0.1)).unwrap();
        let d = h.dense();
        assert!((&d - d.transpose()).abs().max() < 1e-15);
        let f = WaveField::from_fn(g, 1.0, |r, t| Complex64::new(r * t.cos(), 0.0));
        let hf = h.apply(&f);
        let v = nalgebra::DVector::from_iterator(30, f.re.iter().copied());
        let dv = &d * v;
        for (a, b) in dv.iter().zip(hf.re.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        let (lo, hi) = h.spectral_bounds();
        let eig = d.symmetric_eigenvalues();
        assert!(eig.min() >= lo && eig.max() <= hi);
    }

    #[test]
    fn fast_transforms_match_dense_on_fft_sizes() {
        let s = PotentialSurface::surrogate("licn-surrogate").unwrap();
        let m = MassParameters::licn();
        let g = GridSpec::new(29, 37, 3.0, 5.5).unwrap();
        let h = Hamiltonian::new(&s, &m, g, 0.7, Some(0.1)).unwrap();
        let f = WaveField::from_fn(g, 0.7, |r, t| Complex64::new((3.1 * r * t).sin() + r, (r - t).cos()));
        let hf = h.apply(&f);
        let d = h.dense();
        for (plane, out) in [(&f.re, &hf.re), (&f.im, &hf.im)] {
            let v = nalgebra::DVector::from_iterator(g.len(), plane.iter().copied());
            let dv = &d * v;
            let scale = h.spectral_bounds().1 * plane.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in dv.iter().zip(out.iter()) {
                assert!((a - b).abs() < 1e-12 * scale, "{a} {b} {scale}");
            }
        }
    }

    #[test]
    fn rejects_grid_outside_domain() {
        let s = PotentialSurface::new(Backend::Harmonic(HarmonicSurface::standard()), (50.0, 70.0)).unwrap();
        let g = GridSpec::new(8, 8, 40.0, 60.0).unwrap();
        assert!(matches!(
            Hamiltonian::new(&s, &MassParameters::licn(), g, 1.0, None),
            Err(Error::Domain { .. })
        ));
    }
}
