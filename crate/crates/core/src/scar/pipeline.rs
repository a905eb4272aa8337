//! The ħ sweep: one scar function per rung of the Bohr–Sommerfeld ladder,
//! all at the orbit's energy, then the width power law.

use super::fit::{scaling_fit, ScalingFit};
use super::ladder::BSLadder;
use super::width::{transverse_width, transverse_width_cut, OrbitCut, WidthSample};
use crate::classical::{Dynamics, PeriodicOrbit};
use crate::quantum::packet::GridPolicy;
use crate::quantum::spectrum::energy_grid;
use crate::quantum::{
    build_packet, scar_function, Autocorrelation, Band, EhrenfestRule, GridSpec, Hamiltonian, ScarFunction, Spectrum,
    WidthPolicy,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PipelineConfig {
    pub grid: GridPolicy,
    pub width: WidthPolicy,
    pub window: EhrenfestRule,
    /// Half-width (radians) of the θ segment around the orbit used for the
    /// width moments; `None` integrates over the whole θ range.
    pub cut_half_width: Option<f64>,
    /// Autocorrelation span in periods.
    pub span_periods: f64,
    /// Band-spectrum energy grid: points per band spacing `2πħ/T`.
    pub points_per_band: usize,
    /// Bands either side of the working energy covered by the spectrum.
    pub bands_each_side: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid: GridPolicy::default(),
            width: WidthPolicy::Coherent,
            window: EhrenfestRule::default(),
            cut_half_width: None,
            span_periods: 4.0,
            points_per_band: 60,
            bands_each_side: 3,
        }
    }
}

/// Everything produced for one rung.
#[derive(Debug, Clone)]
pub struct BandJob {
    pub n: usize,
    pub hbar: f64,
    pub grid: GridSpec,
    pub t_e: f64,
    pub autocorrelation: Autocorrelation,
    pub spectrum: Spectrum,
    /// Band whose centre is nearest the working energy.
    pub band: Option<Band>,
    pub scar: ScarFunction,
    pub width: WidthSample,
    /// Why the rung is left out of the fit, if it is.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub ladder: BSLadder,
    pub jobs: Vec<BandJob>,
    /// Rungs whose computation failed outright.
    pub failures: Vec<(usize, String)>,
    pub fit: ScalingFit,
}

/// Orbit samples used by the cut.
const CUT_SAMPLES: usize = 400;

fn run_rung(
    dynamics: &Dynamics,
    po: &PeriodicOrbit,
    cut: Option<&OrbitCut>,
    n: usize,
    hbar: f64,
    cfg: &PipelineConfig,
) -> Result<BandJob> {
    let (surface, masses) = (&dynamics.surface, &dynamics.masses);
    let e = po.energy;
    let (grid, cap) = cfg.grid.grid(surface, masses, e, hbar)?;
    let ham = Hamiltonian::new(surface, masses, grid, hbar, Some(cap))?;
    let packet = build_packet(po, hbar, grid, masses, cfg.width)?;
    let t_e = cfg.window.window(po, hbar);
    let span = cfg.span_periods * po.period;
    let (lo, hi) = ham.spectral_bounds();
    let half = 0.5 * (hi - lo);
    let dt = 0.9 * std::f64::consts::PI * hbar / (2.0 * half);
    let reach_t = ((span / dt).round() + 1.0) * dt;
    let min_moments = crate::quantum::chebyshev::terms_needed(half * reach_t / hbar, 1e-15);
    let (scar, run) = scar_function(&ham, &packet, e, t_e, n, min_moments)?;
    let ac = Autocorrelation::from_moments(&run, Autocorrelation::nyquist_step(&run), span)?;
    let spacing = 2.0 * std::f64::consts::PI * hbar / po.period;
    let reach = spacing * (cfg.bands_each_side as f64 + 0.5);
    let npts = 2 * cfg.points_per_band * (cfg.bands_each_side + 1) + 1;
    let spectrum = Spectrum::windowed(&ac, po.period, &energy_grid(e - reach, e + reach, npts))?;
    let band = spectrum
        .bands()
        .into_iter()
        .min_by(|a, b| (a.center - e).abs().total_cmp(&(b.center - e).abs()));
    let tolerance = hbar / po.period;
    let excluded = match band {
        None => Some("no band found near the working energy".to_string()),
        Some(b) if (b.center - e).abs() > tolerance => Some(format!(
            "nearest band centre {:.6e} is {:.3e} hartree from the working energy (tolerance ħ/T = {:.3e})",
            b.center,
            (b.center - e).abs(),
            tolerance
        )),
        Some(_) => None,
    };
    let width = match cut {
        Some(c) => transverse_width_cut(&scar.field, n, c)?,
        None => transverse_width(&scar.field, n)?,
    };
    Ok(BandJob { n, hbar, grid, t_e, autocorrelation: ac, spectrum, band, scar, width, excluded })
}

/// Runs every rung (in parallel, results ordered by n) and fits the widths
/// of the rungs that pass the band check.
pub fn superscar_pipeline(
    dynamics: &Dynamics,
    po: &PeriodicOrbit,
    ladder: &BSLadder,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    if ladder.entries.len() < 4 {
        return Err(Error::Pipeline(format!("{} rungs requested; a fit needs at least 4", ladder.entries.len())));
    }
    cfg.window.validate()?;
    let cut = match cfg.cut_half_width {
        Some(h) => {
            let path = dynamics.orbit_path(po, CUT_SAMPLES);
            Some(OrbitCut::new(path.iter().map(|x| (x[0], x[1])), h)?)
        }
        None => None,
    };
    let outcomes =
        crate::par::map(&ladder.entries, |&(n, hbar)| (n, run_rung(dynamics, po, cut.as_ref(), n, hbar, cfg)));
    let mut jobs = Vec::new();
    let mut failures = Vec::new();
    for (n, out) in outcomes {
        match out {
            Ok(job) => jobs.push(job),
            Err(e) => {
                log::warn!("rung n = {n} failed: {e}");
                failures.push((n, e.to_string()));
            }
        }
    }
    for job in jobs.iter().filter(|j| j.excluded.is_some()) {
        log::warn!("rung n = {} excluded: {}", job.n, job.excluded.as_deref().unwrap_or_default());
    }
    let kept: Vec<WidthSample> = jobs.iter().filter(|j| j.excluded.is_none()).map(|j| j.width.clone()).collect();
    if kept.len() < 4 {
        return Err(Error::Pipeline(format!("only {} usable rungs; a fit needs 4", kept.len())));
    }
    let fit = scaling_fit(&kept, ladder)?;
    Ok(PipelineResult { ladder: ladder.clone(), jobs, failures, fit })
}
