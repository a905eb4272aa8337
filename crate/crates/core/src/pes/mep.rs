use super::spline::CubicSpline;
use super::PotentialSurface;
use crate::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PathSample {
    pub theta: f64,
    pub r: f64,
    pub v: f64,
}

/// Radial minima `R_e(θ)` on `[0, π]` with a clamped cubic interpolant
/// (dR_e/dθ = 0 on the linear configurations).
#[derive(Debug, Clone)]
pub struct MinimumEnergyPath {
    samples: Vec<PathSample>,
    spline: CubicSpline,
}

/// Folds θ onto [0, π]; returns the folded angle and the sign relating
/// d/dθ on the folded branch to d/dθ at the original angle.
#[inline]
pub(crate) fn fold_theta(theta: f64) -> (f64, f64) {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        (2.0 * PI - t, -1.0)
    } else {
        (t, 1.0)
    }
}

impl MinimumEnergyPath {
    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    /// `(R_e, dR_e/dθ, d²R_e/dθ²)` at any θ (even, 2π-periodic extension).
    #[inline]
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let (t, sign) = fold_theta(theta);
        let (r, d, dd) = self.spline.eval3(t);
        (r, sign * d, dd)
    }

    pub fn r_e(&self, theta: f64) -> f64 {
        self.eval(theta).0
    }

    pub fn slope(&self, theta: f64) -> f64 {
        self.eval(theta).1
    }
}

const NEWTON_MAX: usize = 60;

fn radial_newton(surface: &PotentialSurface, theta: f64, mut r: f64) -> Option<f64> {
    let (lo, hi) = surface.r_range();
    for _ in 0..NEWTON_MAX {
        let d = surface.derivs(r, theta);
        if !(d.v_rr > 0.0) {
            return None;
        }
        let step = d.v_r / d.v_rr;
        r -= step;
        if !(r > lo && r < hi) {
            return None;
        }
        if step.abs() <= 1e-14 * r.abs().max(1.0) {
            let d = surface.derivs(r, theta);
            return (d.v_r.abs() <= 1e-9).then_some(r);
        }
    }
    None
}

/// Interior local minima of V(·, θ) on a coarse radial scan.
fn scan_minima(surface: &PotentialSurface, theta: f64) -> Vec<f64> {
    let (lo, hi) = surface.r_range();
    let n = 400;
    let r: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let v: Vec<f64> = r.iter().map(|&x| surface.value(x, theta)).collect();
    (1..n).filter(|&i| v[i] <= v[i - 1] && v[i] < v[i + 1]).map(|i| r[i]).collect()
}

/// Per-θ radial minimisation, warm-started from the neighbouring sample.
///
/// `theta_grid` must be increasing and span exactly `[0, π]`.
pub fn minimum_energy_path(surface: &PotentialSurface, theta_grid: &[f64]) -> Result<MinimumEnergyPath> {
    if theta_grid.len() < 3 {
        return Err(Error::Data("theta grid needs at least three points".into()));
    }
    let first = theta_grid[0];
    let last = theta_grid[theta_grid.len() - 1];
    if first.abs() > 1e-12 || (last - PI).abs() > 1e-12 {
        return Err(Error::Data(format!("theta grid must span [0, π], got [{first}, {last}]")));
    }
    if theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Data("theta grid must be increasing".into()));
    }

    let mut samples = Vec::with_capacity(theta_grid.len());
    let mut prev: Option<f64> = None;
    for &theta in theta_grid {
        let warm = prev.and_then(|r0| radial_newton(surface, theta, r0));
        let r = match warm {
            Some(r) => r,
            None => {
                let mut cands = scan_minima(surface, theta);
                if let Some(p) = prev {
                    cands.sort_by(|a, b| (a - p).abs().total_cmp(&(b - p).abs()));
                }
                cands
                    .into_iter()
                    .find_map(|r0| radial_newton(surface, theta, r0))
                    .ok_or(Error::Path { theta })?
            }
        };
        samples.push(PathSample { theta, r, v: surface.value(r, theta) });
        prev = Some(r);
    }
    let spline = CubicSpline::clamped(
        samples.iter().map(|s| s.theta).collect(),
        samples.iter().map(|s| s.r).collect(),
        0.0,
        0.0,
    )?;
    Ok(MinimumEnergyPath { samples, spline })
}

/// `n` uniformly spaced angles covering `[0, π]`.
pub fn uniform_theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pes::{Backend, ChannelSurface};

    #[test]
    fn separable_channel_is_flat() {
        let mut c = ChannelSurface::curved_test_channel();
        c.r1 = 0.0;
        let s = PotentialSurface::new(Backend::Channel(c), (2.0, 6.0)).unwrap();
        let mep = minimum_energy_path(&s, &uniform_theta_grid(37)).unwrap();
        for p in mep.samples() {
            assert!((p.r - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curved_channel_recovered() {
        let s = PotentialSurface::surrogate("curved-channel").unwrap();
        let mep = minimum_energy_path(&s, &uniform_theta_grid(181)).unwrap();
        for i in 0..50 {
            let t = PI * (i as f64 + 0.37) / 50.0;
            let (r, d, _) = mep.eval(t);
            assert!((r - (4.0 + 0.5 * t.cos())).abs() < 1e-6);
            assert!((d + 0.5 * t.sin()).abs() < 1e-5);
        }
        assert!(mep.eval(0.0).1.abs() < 1e-14);
        assert!(mep.eval(PI).1.abs() < 1e-14);
    }

    #[test]
    fn residual_and_curvature_at_samples() {
        let s = PotentialSurface::surrogate("licn-surrogate").unwrap();
        let mep = minimum_energy_path(&s, &uniform_theta_grid(91)).unwrap();
        for p in mep.samples() {
            let d = s.derivs(p.r, p.theta);
            assert!(d.v_r.abs() <= 1e-9);
            assert!(d.v_rr > 0.0);
        }
    }

    #[test]
    fn folding_is_even() {
        let s = PotentialSurface::surrogate("curved-channel").unwrap();
        let mep = minimum_energy_path(&s, &uniform_theta_grid(91)).unwrap();
        let (a, da, _) = mep.eval(0.7);
        let (b, db, _) = mep.eval(-0.7);
        assert!((a - b).abs() < 1e-15);
        assert!((da + db).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        let s = PotentialSurface::surrogate("curved-channel").unwrap();
        assert!(minimum_energy_path(&s, &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn no_minimum_is_a_path_error() {
        // force constant negative: radial maximum instead of minimum
        let mut c = ChannelSurface::curved_test_channel();
        c.k0 = -2.0;
        let s = PotentialSurface::new(Backend::Channel(c), (2.0, 6.0)).unwrap();
        assert!(matches!(minimum_energy_path(&s, &uniform_theta_grid(10)), Err(Error::Path { .. })));
    }
}
