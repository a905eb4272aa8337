//! Brute-force search for fixed points of the section map in a window.
//!
//! The map residual `F = P(z) − z` is tabulated on a regular grid. Cells
//! where both components change sign, and grid points where `|F|` is a
//! local minimum, seed a Newton solve. Converged orbits inside the window
//! are returned once each.

use super::orbit::{find_periodic_orbit, OrbitOptions, PeriodicOrbit};
use super::section::SectionPoint;
use super::Dynamics;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScanWindow {
    pub psi: (f64, f64),
    pub p_psi: (f64, f64),
    pub n_psi: usize,
    pub n_p: usize,
}

impl ScanWindow {
    fn point(&self, i: usize, j: usize) -> SectionPoint {
        let (a, b) = self.psi;
        let (c, d) = self.p_psi;
        SectionPoint::new(
            a + (b - a) * i as f64 / (self.n_psi - 1) as f64,
            c + (d - c) * j as f64 / (self.n_p - 1) as f64,
        )
    }

    pub fn contains(&self, z: SectionPoint) -> bool {
        z.psi >= self.psi.0 && z.psi <= self.psi.1 && z.p_psi >= self.p_psi.0 && z.p_psi <= self.p_psi.1
    }
}

/// All fixed points of the section map at energy `e` found from the grid
/// seeds, sorted by ψ.
pub fn scan_fixed_points(dyn_: &Dynamics, e: f64, window: &ScanWindow, opts: &OrbitOptions) -> Vec<PeriodicOrbit> {
    let (ni, nj) = (window.n_psi.max(2), window.n_p.max(2));
    let w = ScanWindow { n_psi: ni, n_p: nj, ..*window };
    let residual: Vec<Option<[f64; 2]>> = crate::par::map_range(ni * nj, |k| {
        let z = w.point(k / nj, k % nj);
        dyn_.poincare(z, e).ok().map(|q| [q.psi - z.psi, q.p_psi - z.p_psi])
    });
    let at = |i: usize, j: usize| residual[i * nj + j];
    let size = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    let mut seeds = Vec::new();
    for i in 0..ni - 1 {
        for j in 0..nj - 1 {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            if corners.iter().all(Option::is_some) {
                let c: Vec<[f64; 2]> = corners.iter().map(|v| v.unwrap()).collect();
                let flips = |k: usize| c.iter().any(|v| v[k] > 0.0) && c.iter().any(|v| v[k] < 0.0);
                if flips(0) && flips(1) {
                    let (a, b) = (w.point(i, j), w.point(i + 1, j + 1));
                    seeds.push(SectionPoint::new(0.5 * (a.psi + b.psi), 0.5 * (a.p_psi + b.p_psi)));
                }
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            let Some(f) = at(i, j) else { continue };
            let s = size(f);
            let neighbours = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().filter_map(|&(di, dj): &(i64, i64)| {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                (a >= 0 && b >= 0 && (a as usize) < ni && (b as usize) < nj).then(|| at(a as usize, b as usize)).flatten()
            });
            if neighbours.into_iter().all(|g| size(g) > s) {
                seeds.push(w.point(i, j));
            }
        }
    }
    let solved: Vec<Option<PeriodicOrbit>> =
        crate::par::map(&seeds, |&z| find_periodic_orbit(dyn_, z, e, opts).ok().filter(|po| w.contains(po.section)));
    let mut found: Vec<PeriodicOrbit> = Vec::new();
    for po in solved.into_iter().flatten() {
        let dup = found.iter().any(|f| {
            (f.section.psi - po.section.psi).abs() < 1e-6 && (f.section.p_psi - po.section.p_psi).abs() < 1e-6
        });
        if !dup {
            found.push(po);
        }
    }
    found.sort_by(|a, b| a.section.psi.total_cmp(&b.section.psi));
    found
}

#[cfg(test)]
mod tests {
    use super::super::testutil::dynamics;
    use super::*;

    #[test]
    fn finds_the_harmonic_stretch() {
        let d = dynamics("harmonic");
        let hs = crate::pes::HarmonicSurface::standard();
        let w = ScanWindow { psi: (hs.theta0 - 0.2, hs.theta0 + 0.2), p_psi: (-0.5, 0.5), n_psi: 9, n_p: 9 };
        let found = scan_fixed_points(&d, 0.01, &w, &OrbitOptions::default());
        assert_eq!(found.len(), 1);
        assert!((found[0].section.psi - hs.theta0).abs() < 1e-8);
        assert!(found[0].section.p_psi.abs() < 1e-8);
    }
}
