//! Chebyshev expansion of functions of `H`.
//!
//! With `H̃ = (H − ē)/Δ` mapping the spectral enclosure onto [−1, 1],
//!
//! ```text
//! e^{−iHt/ħ} = e^{−iēt/ħ} Σ_k (2 − δ_k0) (−i)^k J_k(Δt/ħ) T_k(H̃)
//! ```
//!
//! and `T_k(H̃)φ` follow the three-term recurrence. Overlaps with the start
//! vector only need the moments `μ_k = ⟨φ|T_k(H̃)|φ⟩`, and two moments come
//! out of every recurrence vector: `μ_{2k} = 2⟨φ_k|φ_k⟩ − μ₀`,
//! `μ_{2k+1} = 2⟨φ_{k+1}|φ_k⟩ − μ₁`.

use super::field::WaveField;
use super::hamiltonian::Hamiltonian;
use crate::{Error, Result};
use ndarray::{Array2, Zip};
use num_complex::Complex64;

/// `J_0(x) … J_kmax(x)` for `x ≥ 0` by Miller's backward recurrence,
/// normalized with `J₀ + 2ΣJ_{2k} = 1`.
pub fn bessel_j(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = x.abs();
    let top = (kmax as f64).max(x) + 30.0 + 10.0 * x.cbrt();
    let start = top.ceil() as usize | 1;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_{k−1}
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Number of terms after which `|J_k(x)|` stays below `tol`.
pub fn terms_needed(x: f64, tol: f64) -> usize {
    let guess = (x.abs() + 30.0 + 10.0 * x.abs().cbrt()).ceil() as usize;
    let j = bessel_j(x, guess);
    let mut k = guess;
    while k > 0 && j[k].abs() < tol {
        k -= 1;
    }
    k + 2
}

/// The expansion engine for one Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct Chebyshev<'a> {
    pub ham: &'a Hamiltonian,
    pub center: f64,
    pub half_width: f64,
}

/// Moments of a start vector, plus an optional filtered field
/// `Σ c_k T_k(H̃)φ`.
#[derive(Debug, Clone)]
pub struct MomentRun {
    pub moments: Vec<f64>,
    pub filtered: Option<WaveField>,
    pub center: f64,
    pub half_width: f64,
    pub hbar: f64,
}

struct Planes {
    re: Array2<f64>,
    im: Array2<f64>,
}

impl<'a> Chebyshev<'a> {
    pub fn new(ham: &'a Hamiltonian) -> Self {
        let (lo, hi) = ham.spectral_bounds();
        Self { ham, center: 0.5 * (lo + hi), half_width: 0.5 * (hi - lo) }
    }

    /// Scaled argument `Δt/ħ` of the Bessel coefficients.
    pub fn phase_extent(&self, t: f64) -> f64 {
        self.half_width * t.abs() / self.ham.hbar
    }

    /// Visits `T_k(H̃)φ` for `k = 0..n` as `(k, re, im, previous)`.
    fn recurse(&self, f0: &WaveField, n: usize, mut visit: impl FnMut(usize, &Array2<f64>, &Array2<f64>, Option<&Planes>)) {
        let real = f0.im.iter().all(|v| *v == 0.0);
        let shape = f0.re.raw_dim();
        let mut prev = Planes { re: f0.re.clone(), im: f0.im.clone() };
        let mut cur = Planes { re: Array2::zeros(shape), im: Array2::zeros(shape) };
        let mut tmp = self.ham.workspace();
        let (c, d) = (self.center, self.half_width);
        visit(0, &prev.re, &prev.im, None);
        if n == 0 {
            return;
        }
        self.ham.apply_plane(prev.re.view(), cur.re.view_mut(), &mut tmp, c, d);
        if !real {
            self.ham.apply_plane(prev.im.view(), cur.im.view_mut(), &mut tmp, c, d);
        }
        visit(1, &cur.re, &cur.im, Some(&prev));
        let mut scratch = Array2::zeros(shape);
        for k in 2..=n {
            self.ham.apply_plane(cur.re.view(), scratch.view_mut(), &mut tmp, c, d);
            Zip::from(&mut prev.re).and(&scratch).for_each(|p, &s| *p = 2.0 * s - *p);
            if !real {
                self.ham.apply_plane(cur.im.view(), scratch.view_mut(), &mut tmp, c, d);
                Zip::from(&mut prev.im).and(&scratch).for_each(|p, &s| *p = 2.0 * s - *p);
            }
            std::mem::swap(&mut prev, &mut cur);
            visit(k, &cur.re, &cur.im, Some(&prev));
        }
    }

    fn check_range(&self, f: &WaveField) -> Result<()> {
        let hf = self.ham.apply(f);
        let mut g = hf.clone();
        Zip::from(&mut g.re).and(&f.re).for_each(|a, &b| *a = (*a - self.center * b) / self.half_width);
        Zip::from(&mut g.im).and(&f.im).for_each(|a, &b| *a = (*a - self.center * b) / self.half_width);
        let ratio = g.norm() / f.norm();
        if ratio > 1.0 + 1e-9 {
            return Err(Error::Resolution(format!(
                "field energy content exceeds the spectral enclosure (‖H̃φ‖/‖φ‖ = {ratio})"
            )));
        }
        Ok(())
    }

    /// `e^{−iHt/ħ} f` to round-off accuracy.
    pub fn propagate(&self, f: &WaveField, t: f64) -> Result<WaveField> {
        if t == 0.0 {
            return Ok(f.clone());
        }
        self.check_range(f)?;
        let x = self.phase_extent(t);
        let n = terms_needed(x, 1e-17);
        let j = bessel_j(x, n);
        let sgn = t.signum();
        let mut out = WaveField::zeros(f.grid, f.hbar);
        self.recurse(f, n, |k, re, im, _| {
            // (−i)^k J_k(Δt/ħ), using J_k(−x) = (−1)^k J_k(x)
            let mag = if k == 0 { 1.0 } else { 2.0 } * j[k] * if sgn < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            let c = match k % 4 {
                0 => Complex64::new(mag, 0.0),
                1 => Complex64::new(0.0, -mag),
                2 => Complex64::new(-mag, 0.0),
                _ => Complex64::new(0.0, mag),
            };
            Zip::from(&mut out.re).and(&mut out.im).and(re).and(im).for_each(|or, oi, &a, &b| {
                *or += c.re * a - c.im * b;
                *oi += c.re * b + c.im * a;
            });
        });
        out.scale(Complex64::from_polar(1.0, -self.center * t / self.ham.hbar));
        Ok(out)
    }

    /// Moments `μ_0 … μ_{2n}` of `f` (normalized to unit norm first) and,
    /// when `filter` is given, `Σ_k filter[k] T_k(H̃) f` over the available
    /// terms.
    pub fn moments(&self, f: &WaveField, n: usize, filter: Option<&[f64]>) -> Result<MomentRun> {
        self.check_range(f)?;
        let mut f0 = f.clone();
        f0.normalize()?;
        let cell = f0.grid.cell();
        let mut mu = vec![0.0; 2 * n + 1];
        let mut acc = filter.map(|_| WaveField::zeros(f0.grid, f0.hbar));
        self.recurse(&f0, n, |k, re, im, prev| {
            let self_dot = (dot(re, re) + dot(im, im)) * cell;
            if k == 0 {
                mu[0] = self_dot;
            } else {
                mu[2 * k] = 2.0 * self_dot - mu[0];
                let p = prev.expect("previous vector exists for k ≥ 1");
                let cross = (dot(re, &p.re) + dot(im, &p.im)) * cell;
                if k == 1 {
                    mu[1] = cross;
                } else {
                    mu[2 * k - 1] = 2.0 * cross - mu[1];
                }
            }
            if let (Some(acc), Some(c)) = (acc.as_mut(), filter) {
                if let Some(&ck) = c.get(k) {
                    acc.re.scaled_add(ck, re);
                    acc.im.scaled_add(ck, im);
                }
            }
        });
        Ok(MomentRun { moments: mu, filtered: acc, center: self.center, half_width: self.half_width, hbar: self.ham.hbar })
    }
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |s, &x, &y| s + x * y)
}

impl MomentRun {
    /// Largest |t| the moments resolve to accuracy `tol`.
    pub fn max_time(&self, tol: f64) -> f64 {
        let n = self.moments.len() - 1;
        // bisection on the number of terms required
        let (mut lo, mut hi) = (0.0, n as f64 * self.hbar / self.half_width);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if terms_needed(self.half_width * mid / self.hbar, tol) <= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `C(t) = ⟨φ|e^{−iHt/ħ}|φ⟩` from the moments.
    pub fn autocorrelation(&self, t: f64) -> Result<Complex64> {
        let x = self.half_width * t.abs() / self.hbar;
        let n = self.moments.len() - 1;
        if terms_needed(x, 1e-15) > n {
            return Err(Error::Resolution(format!("t = {t} needs more than {n} Chebyshev moments")));
        }
        let j = bessel_j(x, n);
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, (&m, &jk)) in self.moments.iter().zip(&j).enumerate() {
            let mag = if k == 0 { 1.0 } else { 2.0 } * jk * m;
            sum += match k % 4 {
                0 => Complex64::new(mag, 0.0),
                1 => Complex64::new(0.0, -mag),
                2 => Complex64::new(-mag, 0.0),
                _ => Complex64::new(0.0, mag),
            };
        }
        let c = sum * Complex64::from_polar(1.0, -self.center * t.abs() / self.hbar);
        Ok(if t < 0.0 { c.conj() } else { c })
    }
}
