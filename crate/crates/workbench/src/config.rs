//! The run configuration: one TOML file that drives every command.
//!
//! Energies are given in cm⁻¹, angles of guesses in degrees; everything
//! is converted to atomic units when the run objects are built.

use crate::error::{Result, WorkbenchError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use superscar::classical::{ContinuationOptions, CrossingDirection, Dynamics, OrbitOptions, SectionPoint};
use superscar::pes::{load_coefficients, minimum_energy_path, uniform_theta_grid, MassParameters, PotentialSurface};
use superscar::quantum::packet::GridPolicy;
use superscar::quantum::{EhrenfestRule, WidthPolicy};
use superscar::scar::PipelineConfig;
use superscar::units::{cm1_to_hartree, EnergyUnit};

/// Smallest number of rungs accepted for a sweep.
pub const MIN_RUNGS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Parent of the content-addressed run directories.
    pub output_dir: PathBuf,
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub masses: MassConfig,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub orbits: OrbitsConfig,
    #[serde(default)]
    pub sos: SosConfig,
    pub sweep: SweepConfig,
}

/// Exactly one of `surrogate` and `file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub surrogate: Option<String>,
    /// Legendre coefficient file, relative to the config file.
    pub file: Option<PathBuf>,
    /// R domain (bohr) for series made only of analytic terms.
    pub r_range: Option<[f64; 2]>,
}

/// Atomic masses in amu and the frozen C–N distance in bohr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub m_li: f64,
    pub m_c: f64,
    pub m_n: f64,
    pub r_e: f64,
}

impl Default for MassConfig {
    fn default() -> Self {
        let m = MassParameters::licn();
        Self { m_li: m.m_li, m_c: m.m_c, m_n: m.m_n, r_e: m.r_e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    /// Energy unit of human-facing reports.
    pub report_energy: EnergyUnit,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { report_energy: EnergyUnit::Cm1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Time step, a.u.
    pub step: f64,
    pub max_return_time: f64,
    pub crossing: CrossingDirection,
    /// θ samples of the minimum-energy path.
    pub path_points: usize,
    pub orbit_tol: f64,
    pub max_newton: usize,
    pub marginal_tol: f64,
    pub outer_turning_point: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let o = OrbitOptions::default();
        Self {
            step: 5.0,
            max_return_time: 2.0e5,
            crossing: CrossingDirection::Outward,
            path_points: 181,
            orbit_tol: o.tol,
            max_newton: o.max_iter,
            marginal_tol: o.marginal_tol,
            outer_turning_point: o.outer_turning_point,
        }
    }
}

/// The orbit family: a starting guess on its unstable member, the range
/// searched for the fold below it and the far working energy above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitsConfig {
    pub start_cm1: f64,
    pub guess_psi_deg: f64,
    pub guess_p_psi: f64,
    /// Energy window of the downward continuation that locates the fold.
    pub e_min_cm1: f64,
    pub e_max_cm1: f64,
    pub far: FarTarget,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    /// Energy scale (hartree) of the upward continuation's arclength.
    #[serde(default = "default_up_scale")]
    pub up_energy_scale: f64,
}

fn default_max_points() -> usize {
    400
}

fn default_up_scale() -> f64 {
    1e-3
}

/// Far working energy: a multiple of the fold energy or an absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FarTarget {
    Multiple(f64),
    EnergyCm1(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SosConfig {
    /// Working energies ("bif", "far") to section.
    pub targets: Vec<String>,
    /// Additional energies, cm⁻¹.
    pub energies_cm1: Vec<f64>,
    pub trajectories: usize,
    pub iterations: usize,
}

impl Default for SosConfig {
    fn default() -> Self {
        Self { targets: vec!["bif".into(), "far".into()], energies_cm1: vec![], trajectories: 50, iterations: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default = "default_width")]
    pub width: WidthPolicy,
    #[serde(default = "default_span")]
    pub span_periods: f64,
    #[serde(default = "default_points_per_band")]
    pub points_per_band: usize,
    #[serde(default = "default_bands")]
    pub bands_each_side: usize,
    pub bif: RungConfig,
    pub far: RungConfig,
}

fn default_width() -> WidthPolicy {
    WidthPolicy::Coherent
}

fn default_span() -> f64 {
    PipelineConfig::default().span_periods
}

fn default_points_per_band() -> usize {
    PipelineConfig::default().points_per_band
}

fn default_bands() -> usize {
    PipelineConfig::default().bands_each_side
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungConfig {
    /// Inclusive range of excitation numbers n.
    pub n_range: [usize; 2],
    pub window: EhrenfestRule,
    /// Half-width (rad) of the θ strip around the orbit; absent for the
    /// whole θ range.
    pub cut_half_width: Option<f64>,
}

impl RungConfig {
    pub fn ns(&self) -> std::ops::RangeInclusive<usize> {
        self.n_range[0]..=self.n_range[1]
    }
}

impl SweepConfig {
    pub fn pipeline(&self, rung: &RungConfig) -> PipelineConfig {
        PipelineConfig {
            grid: self.grid,
            width: self.width,
            window: rung.window,
            cut_half_width: rung.cut_half_width,
            span_periods: self.span_periods,
            points_per_band: self.points_per_band,
            bands_each_side: self.bands_each_side,
        }
    }
}

/// Collects every schema problem before reporting.
struct Problems(Vec<String>);

impl Problems {
    fn check(&mut self, ok: bool, field: &str, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(format!("{field}: {}", msg()));
        }
    }

    fn positive(&mut self, field: &str, v: f64) {
        self.check(v > 0.0 && v.is_finite(), field, || format!("must be a positive number, got {v}"));
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| WorkbenchError::Config(e.to_string()))
    }

    /// Reads, parses and validates a config file. A relative coefficient
    /// path is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WorkbenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = &cfg.surface.file {
            if f.is_relative() {
                cfg.surface.file = Some(base.join(f));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = Problems(Vec::new());
        let s = &self.surface;
        p.check(s.surrogate.is_some() != s.file.is_some(), "surface", || {
            "set exactly one of `surrogate` and `file`".into()
        });
        if let Some(name) = &s.surrogate {
            p.check(PotentialSurface::surrogate(name).is_ok(), "surface.surrogate", || {
                format!("unknown surrogate `{name}` (known: licn-surrogate, harmonic, curved-channel)")
            });
        }
        if let Some([a, b]) = s.r_range {
            p.check(a > 0.0 && b > a, "surface.r_range", || format!("need 0 < min < max, got [{a}, {b}]"));
        }
        let m = &self.masses;
        for (f, v) in [("masses.m_li", m.m_li), ("masses.m_c", m.m_c), ("masses.m_n", m.m_n), ("masses.r_e", m.r_e)] {
            p.positive(f, v);
        }
        let i = &self.integrator;
        p.positive("integrator.step", i.step);
        p.positive("integrator.max_return_time", i.max_return_time);
        p.positive("integrator.orbit_tol", i.orbit_tol);
        p.positive("integrator.marginal_tol", i.marginal_tol);
        p.check(i.path_points >= 11, "integrator.path_points", || format!("need at least 11, got {}", i.path_points));
        p.check(i.max_newton >= 1, "integrator.max_newton", || "must be at least 1".into());
        let o = &self.orbits;
        p.check(o.e_min_cm1 < o.start_cm1 && o.start_cm1 < o.e_max_cm1, "orbits", || {
            format!("need e_min_cm1 < start_cm1 < e_max_cm1, got {} < {} < {}", o.e_min_cm1, o.start_cm1, o.e_max_cm1)
        });
        p.check((0.0..=180.0).contains(&o.guess_psi_deg), "orbits.guess_psi_deg", || {
            format!("must lie in [0, 180], got {}", o.guess_psi_deg)
        });
        p.check(o.guess_p_psi.is_finite(), "orbits.guess_p_psi", || "must be finite".into());
        p.check(o.max_points >= 10, "orbits.max_points", || format!("need at least 10, got {}", o.max_points));
        p.positive("orbits.up_energy_scale", o.up_energy_scale);
        match o.far {
            FarTarget::Multiple(k) => p.check(k > 1.0 && k.is_finite(), "orbits.far.multiple", || {
                format!("must exceed 1, got {k}")
            }),
            FarTarget::EnergyCm1(e) => p.check(e > o.start_cm1, "orbits.far.energy-cm1", || {
                format!("must lie above start_cm1 = {}, got {e}", o.start_cm1)
            }),
        }
        for (k, t) in self.sos.targets.iter().enumerate() {
            p.check(t == "bif" || t == "far", &format!("sos.targets[{k}]"), || {
                format!("expected \"bif\" or \"far\", got \"{t}\"")
            });
        }
        for (k, &e) in self.sos.energies_cm1.iter().enumerate() {
            p.positive(&format!("sos.energies_cm1[{k}]"), e);
        }
        p.check(self.sos.trajectories > 0, "sos.trajectories", || "must be at least 1".into());
        p.check(self.sos.iterations > 0, "sos.iterations", || "must be at least 1".into());
        let w = &self.sweep;
        p.check(w.grid.points_per_wavelength >= 2.0, "sweep.grid.points_per_wavelength", || {
            format!("need at least 2, got {}", w.grid.points_per_wavelength)
        });
        p.positive("sweep.grid.margin", w.grid.margin);
        p.positive("sweep.grid.cap", w.grid.cap);
        if let WidthPolicy::Fixed { sigma_r, sigma_theta } = w.width {
            p.positive("sweep.width.sigma_r", sigma_r);
            p.positive("sweep.width.sigma_theta", sigma_theta);
        }
        p.positive("sweep.span_periods", w.span_periods);
        p.check(w.points_per_band >= 4, "sweep.points_per_band", || format!("need at least 4, got {}", w.points_per_band));
        for (label, r) in [("bif", &w.bif), ("far", &w.far)] {
            let [lo, hi] = r.n_range;
            let count = if hi >= lo { hi - lo + 1 } else { 0 };
            p.check(count >= MIN_RUNGS, &format!("sweep.{label}.n_range"), || {
                format!("[{lo}, {hi}] gives {count} rungs; a width fit needs at least {MIN_RUNGS}")
            });
            p.check(lo >= 1, &format!("sweep.{label}.n_range"), || "n must start at 1 or above".into());
            p.check(r.window.validate().is_ok(), &format!("sweep.{label}.window"), || {
                "multiplier must be positive".into()
            });
            if let Some(h) = r.cut_half_width {
                p.positive(&format!("sweep.{label}.cut_half_width"), h);
            }
        }
        if p.0.is_empty() {
            Ok(())
        } else {
            Err(WorkbenchError::Config(p.0.join("\n")))
        }
    }

    /// SHA-256 over the canonical JSON form (output directory excluded)
    /// and the crate version.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output_dir = PathBuf::new();
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(serde_json::to_vec(&keyed).expect("config serializes"));
        hex::encode(h.finalize())
    }

    pub fn mass_parameters(&self) -> Result<MassParameters> {
        let m = &self.masses;
        MassParameters::new(m.m_li, m.m_c, m.m_n, m.r_e).map_err(|e| WorkbenchError::Config(format!("masses: {e}")))
    }

    pub fn surface(&self) -> Result<PotentialSurface> {
        if let Some(name) = &self.surface.surrogate {
            return PotentialSurface::surrogate(name).map_err(|e| WorkbenchError::Config(format!("surface.surrogate: {e}")));
        }
        let path = self.surface.file.as_ref().expect("validated: one of surrogate/file");
        if !path.exists() {
            return Err(WorkbenchError::MissingDependency(format!("coefficient file {} not found", path.display())));
        }
        let series = load_coefficients(path).map_err(|e| WorkbenchError::Config(format!("surface.file: {e}")))?;
        let range = self.surface.r_range.map(|[a, b]| (a, b)).unwrap_or((2.5, 7.0));
        PotentialSurface::from_series(series, range).map_err(|e| WorkbenchError::Config(format!("surface.file: {e}")))
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        let surface = self.surface()?;
        let path = minimum_energy_path(&surface, &uniform_theta_grid(self.integrator.path_points))?;
        let mut d = Dynamics::new(surface, self.mass_parameters()?, path);
        d.step = self.integrator.step;
        d.max_return_time = self.integrator.max_return_time;
        d.direction = self.integrator.crossing;
        Ok(d)
    }

    pub fn orbit_options(&self) -> OrbitOptions {
        let i = &self.integrator;
        OrbitOptions {
            tol: i.orbit_tol,
            max_iter: i.max_newton,
            marginal_tol: i.marginal_tol,
            outer_turning_point: i.outer_turning_point,
        }
    }

    /// The downward continuation that locates the fold.
    pub fn fold_search(&self) -> ContinuationOptions {
        let o = &self.orbits;
        let guess = SectionPoint::new(o.guess_psi_deg.to_radians(), o.guess_p_psi);
        let mut c = ContinuationOptions::new(
            cm1_to_hartree(o.start_cm1),
            guess,
            cm1_to_hartree(o.e_min_cm1),
            cm1_to_hartree(o.e_max_cm1),
        );
        c.max_points = o.max_points;
        c.tol = c.tol.max(self.integrator.orbit_tol);
        c
    }
}
