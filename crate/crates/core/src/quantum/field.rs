use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Uniform product grid. R points are the interior nodes of
/// `[r_min, r_max]` (the walls themselves are excluded); θ points are the
/// cell midpoints `(m + ½)π/N_θ` of `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl GridSpec {
    pub fn new(n_r: usize, n_theta: usize, r_min: f64, r_max: f64) -> Result<Self> {
        let g = Self { n_r, n_theta, r_min, r_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r < 2 || self.n_theta < 2 {
            return Err(Error::GridTooSmall(format!("{}×{} grid", self.n_r, self.n_theta)));
        }
        if !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err(Error::Contract(format!("R interval [{}, {}] must be positive and increasing", self.r_min, self.r_max)));
        }
        Ok(())
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_r + 1) as f64
    }

    pub fn dtheta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        self.r_min + (j + 1) as f64 * self.dr()
    }

    pub fn theta(&self, m: usize) -> f64 {
        (m as f64 + 0.5) * self.dtheta()
    }

    pub fn r_points(&self) -> Vec<f64> {
        (0..self.n_r).map(|j| self.r(j)).collect()
    }

    pub fn theta_points(&self) -> Vec<f64> {
        (0..self.n_theta).map(|m| self.theta(m)).collect()
    }

    /// Quadrature weight of one grid cell.
    pub fn cell(&self) -> f64 {
        self.dr() * self.dtheta()
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Complex amplitudes `ψ(R_j, θ_m)` stored as separate real and imaginary
/// planes (rows are R, columns θ).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: GridSpec,
    pub hbar: f64,
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl WaveField {
    pub fn zeros(grid: GridSpec, hbar: f64) -> Self {
        let shape = (grid.n_r, grid.n_theta);
        Self { grid, hbar, re: Array2::zeros(shape), im: Array2::zeros(shape) }
    }

    pub fn from_fn(grid: GridSpec, hbar: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut out = Self::zeros(grid, hbar);
        for j in 0..grid.n_r {
            let r = grid.r(j);
            for m in 0..grid.n_theta {
                let z = f(r, grid.theta(m));
                out.re[[j, m]] = z.re;
                out.im[[j, m]] = z.im;
            }
        }
        out
    }

    pub fn real(grid: GridSpec, hbar: f64, re: Array2<f64>) -> Self {
        let im = Array2::zeros(re.raw_dim());
        Self { grid, hbar, re, im }
    }

    pub fn get(&self, j: usize, m: usize) -> Complex64 {
        Complex64::new(self.re[[j, m]], self.im[[j, m]])
    }

    /// `⟨self|other⟩ = ∫∫ ψ̄ φ dR dθ`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((a, b), (c, d)) in self.re.iter().zip(self.im.iter()).zip(other.re.iter().zip(other.im.iter())) {
            re += a * c + b * d;
            im += a * d - b * c;
        }
        Complex64::new(re, im) * self.grid.cell()
    }

    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self.re.iter().chain(self.im.iter()).map(|v| v * v).sum();
        s * self.grid.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        ndarray::Zip::from(&mut self.re).and(&mut self.im).for_each(|a, b| {
            let z = Complex64::new(*a, *b) * c;
            *a = z.re;
            *b = z.im;
        });
    }

    /// Scales to unit norm; returns the previous norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Contract(format!("cannot normalize a field of norm {n}")));
        }
        self.scale(Complex64::new(1.0 / n, 0.0));
        Ok(n)
    }

    /// `|ψ|²` on the grid.
    pub fn density(&self) -> Array2<f64> {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `|⟨self|other⟩| / (‖self‖ ‖other‖)`.
    pub fn overlap(&self, other: &WaveField) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }
}
