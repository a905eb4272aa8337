//! Composite surfaces of section from many seeded trajectories.

use super::section::SectionPoint;
use super::Dynamics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SosOptions {
    pub energy: f64,
    pub trajectories: usize,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SosTrajectory {
    pub index: usize,
    pub start: SectionPoint,
    pub points: Vec<SectionPoint>,
    /// Reason the trajectory stopped before `iterations` returns.
    pub terminated: Option<String>,
}

impl Dynamics {
    /// Largest `|P_ψ|` allowed at ψ on the section.
    pub fn p_psi_max(&self, psi: f64, e: f64) -> Option<f64> {
        let (r, a, _) = self.path.eval(psi);
        let v = self.surface.value(r, psi);
        if v > e {
            return None;
        }
        let b = self.masses.bend(r);
        let qa = 0.5 / self.masses.mu1 + b * a * a;
        Some((2.0 * self.masses.mu1 * qa * (e - v) / b).sqrt())
    }

    /// Uniform sample of the energetically allowed section region; stream
    /// `index` of the ChaCha generator seeded with `seed`.
    pub fn sample_section(&self, e: f64, seed: u64, index: usize) -> Option<SectionPoint> {
        let pi = std::f64::consts::PI;
        let bound = (0..=200)
            .filter_map(|i| self.p_psi_max(pi * i as f64 / 200.0, e))
            .fold(0.0_f64, f64::max)
            * 1.01;
        if bound == 0.0 {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        for _ in 0..10_000 {
            let psi = rng.random_range(0.0..pi);
            let p = rng.random_range(-bound..bound);
            if self.p_psi_max(psi, e).is_some_and(|m| p.abs() < m) {
                return Some(SectionPoint::new(psi, p));
            }
        }
        None
    }

    pub fn trajectory(&self, start: SectionPoint, e: f64, iterations: usize) -> (Vec<SectionPoint>, Option<String>) {
        let mut pts = Vec::with_capacity(iterations);
        let mut z = start;
        for _ in 0..iterations {
            match self.poincare(z, e) {
                Ok(q) => {
                    pts.push(q);
                    z = q;
                }
                Err(err) => return (pts, Some(err.to_string())),
            }
        }
        (pts, None)
    }
}

/// Runs `opts.trajectories` independent trajectories in parallel; the
/// result is ordered by trajectory index and independent of thread count.
pub fn composite_section(dyn_: &Dynamics, opts: &SosOptions) -> Vec<SosTrajectory> {
    crate::par::map_range(opts.trajectories, |i| match dyn_.sample_section(opts.energy, opts.seed, i) {
        Some(start) => {
            let (points, terminated) = dyn_.trajectory(start, opts.energy, opts.iterations);
            SosTrajectory { index: i, start, points, terminated }
        }
        None => SosTrajectory {
            index: i,
            start: SectionPoint::new(f64::NAN, f64::NAN),
            points: Vec::new(),
            terminated: Some("no allowed starting point".into()),
        },
    })
}
