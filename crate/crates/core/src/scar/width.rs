use crate::quantum::WaveField;
use crate::{Error, Result};

/// Rows whose weight is below this fraction of the largest are skipped.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WidthSample {
    pub n: usize,
    /// Mean transverse width, radians.
    pub sigma: f64,
    pub r: Vec<f64>,
    /// `σ_R²` per row (NaN where the row was skipped).
    pub variance: Vec<f64>,
    /// `W(R)` normalized to unit integral over the kept rows (zero where
    /// skipped).
    pub weight: Vec<f64>,
}

/// A segment of fixed half-width in θ around the orbit at every R. Rows
/// outside the orbit's R extent use the nearest end of the orbit.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OrbitCut {
    /// Orbit samples `(R, θ)` sorted by R.
    pub path: Vec<(f64, f64)>,
    pub half_width: f64,
}

impl OrbitCut {
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>, half_width: f64) -> Result<Self> {
        let mut path: Vec<(f64, f64)> = points.into_iter().collect();
        if path.is_empty() || !(half_width > 0.0) {
            return Err(Error::Contract("a cut needs orbit points and a positive half-width".into()));
        }
        path.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { path, half_width })
    }

    /// Orbit angle at `r`, linearly interpolated.
    pub fn center(&self, r: f64) -> f64 {
        let p = &self.path;
        let i = p.partition_point(|q| q.0 < r);
        if i == 0 {
            return p[0].1;
        }
        if i == p.len() {
            return p[p.len() - 1].1;
        }
        let (a, b) = (p[i - 1], p[i]);
        if b.0 - a.0 <= 0.0 {
            return a.1;
        }
        a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0)
    }
}

/// θ-variance of `|ψ|²` at each R, averaged with the row weights
/// `W(R) = ∫|ψ|² dθ`.
pub fn transverse_width(field: &WaveField, n: usize) -> Result<WidthSample> {
    width_with_mask(field, n, |_, _| true)
}

/// Same as [`transverse_width`] with every θ integral restricted to the cut.
pub fn transverse_width_cut(field: &WaveField, n: usize, cut: &OrbitCut) -> Result<WidthSample> {
    width_with_mask(field, n, |r, t| (t - cut.center(r)).abs() <= cut.half_width)
}

fn width_with_mask(field: &WaveField, n: usize, keep_point: impl Fn(f64, f64) -> bool) -> Result<WidthSample> {
    let g = field.grid;
    let mut dens = field.density();
    let dt = g.dtheta();
    let dr = g.dr();
    let theta = g.theta_points();
    for (j, mut row) in dens.rows_mut().into_iter().enumerate() {
        let r = g.r(j);
        for (v, &t) in row.iter_mut().zip(&theta) {
            if !keep_point(r, t) {
                *v = 0.0;
            }
        }
    }
    let raw: Vec<f64> = dens.rows().into_iter().map(|row| row.sum() * dt).collect();
    let w_max = raw.iter().copied().fold(0.0, f64::max);
    if !(w_max > 0.0) {
        return Err(Error::WidthUndefined);
    }
    let keep: Vec<bool> = raw.iter().map(|&w| w >= WEIGHT_FLOOR * w_max).collect();
    let total: f64 = raw.iter().zip(&keep).filter(|(_, k)| **k).map(|(w, _)| w * dr).sum();
    let mut variance = vec![f64::NAN; g.n_r];
    let mut weight = vec![0.0; g.n_r];
    let mut acc = 0.0;
    for (j, row) in dens.rows().into_iter().enumerate() {
        if !keep[j] {
            continue;
        }
        let w = raw[j];
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (&rho, &t) in row.iter().zip(&theta) {
            m1 += t * rho;
            m2 += t * t * rho;
        }
        m1 *= dt / w;
        m2 *= dt / w;
        let var = (m2 - m1 * m1).max(0.0);
        variance[j] = var;
        weight[j] = w / total;
        acc += weight[j] * var * dr;
    }
    Ok(WidthSample { n, sigma: acc.sqrt(), r: g.r_points(), variance, weight })
}
