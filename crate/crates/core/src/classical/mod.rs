//! Classical dynamics: symplectic propagation, the Poincaré section anchored
//! on the minimum-energy path, periodic orbits, their continuation in
//! energy and composite surfaces of section.

pub mod continuation;
pub mod integrator;
pub mod orbit;
pub mod scan;
pub mod section;
pub mod sos;

pub use continuation::{continue_branch, Bifurcation, BranchPoint, ContinuationOptions, ContinuationResult};
pub use integrator::{Integrator, State, Tangent};
pub use orbit::{find_periodic_orbit, periodic_orbit_at, OrbitOptions, PeriodicOrbit, Stability, TurningPoint};
pub use scan::{scan_fixed_points, ScanWindow};
pub use section::{Crossing, CrossingDirection, SectionPoint};
pub use sos::{composite_section, SosOptions, SosTrajectory};

use crate::pes::{MassParameters, MinimumEnergyPath, PotentialSurface};

/// Everything needed to run trajectories: surface, masses, the section
/// curve and the propagation settings.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub surface: PotentialSurface,
    pub masses: MassParameters,
    pub path: MinimumEnergyPath,
    /// Integrator step, a.u. of time.
    pub step: f64,
    /// Longest time allowed between two section crossings.
    pub max_return_time: f64,
    pub direction: CrossingDirection,
}

impl Dynamics {
    pub fn new(surface: PotentialSurface, masses: MassParameters, path: MinimumEnergyPath) -> Self {
        Self {
            surface,
            masses,
            path,
            step: 5.0,
            max_return_time: 2.0e5,
            direction: CrossingDirection::Outward,
        }
    }

    pub fn integrator(&self) -> Integrator<'_> {
        Integrator::new(&self.surface, &self.masses)
    }

    pub fn energy(&self, x: &State) -> f64 {
        self.integrator().energy(x)
    }

    /// Propagates for `duration` (either sign) in equal steps no longer
    /// than `self.step`.
    pub fn flow(&self, x: &State, duration: f64) -> State {
        let n = (duration.abs() / self.step).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        let integ = self.integrator();
        let mut y = *x;
        for _ in 0..n {
            integ.step(&mut y, h);
        }
        y
    }

    /// Like [`Dynamics::flow`] but also returns the 4×4 tangent map.
    pub fn flow_tangent(&self, x: &State, duration: f64) -> (State, Tangent) {
        let n = (duration.abs() / self.step).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        let integ = self.integrator();
        let mut y = *x;
        let mut j = integrator::identity();
        for _ in 0..n {
            integ.step_tangent(&mut y, &mut j, h);
        }
        (y, j)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::pes::{minimum_energy_path, uniform_theta_grid};

    pub fn dynamics(name: &str) -> Dynamics {
        let surface = PotentialSurface::surrogate(name).unwrap();
        let path = minimum_energy_path(&surface, &uniform_theta_grid(181)).unwrap();
        Dynamics::new(surface, MassParameters::licn(), path)
    }
}
