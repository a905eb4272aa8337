//! The stage graph: `orbits` feeds `sos`, `sweep-bif` and `sweep-far`;
//! `plots` reads all of them.

use crate::config::{FarTarget, RunConfig};
use crate::error::{Result, WorkbenchError};
use crate::store::RunStore;
use crate::tables::{field_from_bytes, field_to_bytes, Table};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use superscar::classical::{
    composite_section, continue_branch, find_periodic_orbit, periodic_orbit_at, ContinuationResult, Dynamics,
    PeriodicOrbit, SectionPoint, SosOptions, Stability,
};
use superscar::quantum::{Band, GridSpec};
use superscar::scar::{superscar_pipeline, BSLadder, Classification, ScalingFit};
use superscar::units::{cm1_to_hartree, hartree_to_cm1, EnergyUnit};

pub const ORBITS: &str = "orbits";
pub const SOS: &str = "sos";
pub const SWEEP_BIF: &str = "sweep-bif";
pub const SWEEP_FAR: &str = "sweep-far";
pub const PLOTS: &str = "plots";

/// Command that produces each stage, for error messages.
fn producer(stage: &str) -> &'static str {
    match stage {
        ORBITS => "orbits",
        SOS => "sos",
        SWEEP_BIF | SWEEP_FAR => "scarsweep",
        _ => "export-plots",
    }
}

/// Orbit samples written for plot overlays and used by the width cut.
const PATH_SAMPLES: usize = 400;

pub struct Run {
    pub cfg: RunConfig,
    pub hash: String,
    pub store: RunStore,
    /// Recompute the requested stages even when they are complete.
    pub force: bool,
    dynamics: Option<Dynamics>,
}

impl Run {
    pub fn open(cfg: RunConfig, force: bool) -> Result<Self> {
        let store = RunStore::open(&cfg)?;
        Ok(Self { hash: cfg.hash(), cfg, store, force, dynamics: None })
    }

    fn dynamics(&mut self) -> Result<&Dynamics> {
        if self.dynamics.is_none() {
            self.dynamics = Some(self.cfg.dynamics()?);
        }
        Ok(self.dynamics.as_ref().expect("just built"))
    }

    fn unit(&self) -> EnergyUnit {
        self.cfg.units.report_energy
    }

    fn in_report_unit(&self, e: f64) -> f64 {
        e / self.unit().to_hartree()
    }

    /// Runs `stage` unless it is complete and may be reused. Returns
    /// whether it ran.
    pub fn stage(&mut self, stage: &str, requested: bool, body: fn(&mut Run) -> Result<()>) -> Result<bool> {
        if self.store.is_complete(stage) && !(requested && self.force) {
            log::info!("stage {stage}: complete, reusing");
            return Ok(false);
        }
        log::info!("stage {stage}: running");
        self.store.begin(stage)?;
        let t0 = Instant::now();
        match body(self) {
            Ok(()) => {
                self.store.finish(stage, t0.elapsed().as_secs_f64())?;
                log::info!("stage {stage}: done in {:.1} s", t0.elapsed().as_secs_f64());
                Ok(true)
            }
            Err(e) => {
                self.store.fail(stage, &e.to_string())?;
                Err(e)
            }
        }
    }

    /// Fails with a dependency error unless `stage` is complete.
    pub fn require(&self, stage: &str) -> Result<()> {
        if self.store.is_complete(stage) {
            Ok(())
        } else {
            Err(WorkbenchError::MissingDependency(format!(
                "stage `{stage}` has no verified output in {}; run `superscar {}` with this config first",
                self.store.root().display(),
                producer(stage)
            )))
        }
    }

    pub fn working_orbits(&self) -> Result<WorkingOrbits> {
        self.require(ORBITS)?;
        self.store.read_json("orbits/working.json")
    }

    pub fn sweep_report(&self, label: &str) -> Result<SweepReport> {
        self.require(sweep_stage(label))?;
        self.store.read_json(&format!("sweep/{label}/report.json"))
    }
}

pub fn sweep_stage(label: &str) -> &'static str {
    if label == "bif" {
        SWEEP_BIF
    } else {
        SWEEP_FAR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkingOrbits {
    /// The orbit at the fold.
    pub bif: PeriodicOrbit,
    /// The unstable member at the far working energy.
    pub far: PeriodicOrbit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub energy_hartree: f64,
    pub energy: f64,
    pub psi_deg: f64,
    pub p_psi_au: f64,
    pub period_au: f64,
    /// `∮p·dq/2π`, a.u.
    pub reduced_action_au: f64,
    pub maslov: u32,
    pub trace: f64,
    pub stability: Stability,
    pub lyapunov_au: f64,
    pub closure_residual: f64,
}

impl OrbitSummary {
    fn of(po: &PeriodicOrbit, unit: EnergyUnit) -> Self {
        Self {
            energy_hartree: po.energy,
            energy: po.energy / unit.to_hartree(),
            psi_deg: po.section.psi.to_degrees(),
            p_psi_au: po.section.p_psi,
            period_au: po.period,
            reduced_action_au: po.reduced_action(),
            maslov: po.maslov,
            trace: po.trace,
            stability: po.stability,
            lyapunov_au: po.lyapunov,
            closure_residual: po.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport {
    pub config_hash: String,
    pub energy_unit: EnergyUnit,
    pub e_bif: f64,
    pub e_bif_hartree: f64,
    pub trace_at_fold: f64,
    pub fold_psi_deg: f64,
    pub fold_p_psi_au: f64,
    /// Where the stable member loses stability again, if seen.
    pub stability_loss: Option<f64>,
    /// `dψ/dE` signs away from the fold: +1 moves to larger ψ.
    pub unstable_psi_direction: f64,
    pub stable_psi_direction: f64,
    pub bif_orbit: OrbitSummary,
    pub far_orbit: OrbitSummary,
    pub down_branch_points: usize,
    pub up_branch_points: usize,
}

fn branch_table(down: &ContinuationResult, up: &ContinuationResult) -> Table {
    let mut t = Table::new(&[
        "side", "energy_cm1", "energy_hartree", "psi_rad", "p_psi_au", "trace", "stability", "period_au", "action_au",
    ])
    .note("continuation of the orbit family; side = down (through the fold) or up (unstable member)");
    for (side, branch) in [("down", down), ("up", up)] {
        for p in &branch.points {
            t.push(vec![
                side.to_string(),
                hartree_to_cm1(p.energy).to_string(),
                p.energy.to_string(),
                p.section.psi.to_string(),
                p.section.p_psi.to_string(),
                p.trace.to_string(),
                p.stability.as_str().to_string(),
                p.period.to_string(),
                p.action.to_string(),
            ]);
        }
    }
    t
}

/// Newton solve at `target` from the branch points that bracket it.
fn orbit_on_branch(d: &Dynamics, branch: &ContinuationResult, target: f64, run: &Run) -> Result<PeriodicOrbit> {
    let pts = &branch.points;
    let k = pts
        .windows(2)
        .position(|w| (w[0].energy - target) * (w[1].energy - target) <= 0.0)
        .ok_or_else(|| {
            let top = pts.iter().map(|p| p.energy).fold(f64::NEG_INFINITY, f64::max);
            WorkbenchError::Numeric(format!(
                "the upward branch stops at {:.2} cm-1 below the far energy {:.2} cm-1{}",
                hartree_to_cm1(top),
                hartree_to_cm1(target),
                branch.failure.as_deref().map(|f| format!(" ({f})")).unwrap_or_default()
            ))
        })?;
    let (a, b) = (&pts[k], &pts[k + 1]);
    let s = if b.energy != a.energy { (target - a.energy) / (b.energy - a.energy) } else { 0.0 };
    let guess = SectionPoint::new(
        a.section.psi + s * (b.section.psi - a.section.psi),
        a.section.p_psi + s * (b.section.p_psi - a.section.p_psi),
    );
    Ok(find_periodic_orbit(d, guess, target, &run.cfg.orbit_options())?)
}

fn psi_direction(points: &[superscar::classical::BranchPoint]) -> f64 {
    match (points.first(), points.last()) {
        (Some(a), Some(b)) if b.energy != a.energy => ((b.section.psi - a.section.psi) / (b.energy - a.energy)).signum(),
        _ => 0.0,
    }
}

pub fn run_orbits(run: &mut Run) -> Result<()> {
    let opts = run.cfg.orbit_options();
    let down_opts = run.cfg.fold_search();
    let far_cfg = run.cfg.orbits.far;
    let up_scale = run.cfg.orbits.up_energy_scale;
    let d = run.dynamics()?.clone();
    let down = continue_branch(&d, &down_opts)?;
    let fold = down.bifurcation.ok_or_else(|| {
        WorkbenchError::Numeric(format!(
            "no saddle-node fold between {} and {} cm-1{}",
            hartree_to_cm1(down_opts.e_min),
            hartree_to_cm1(down_opts.e_max),
            down.failure.as_deref().map(|f| format!(" ({f})")).unwrap_or_default()
        ))
    })?;
    let bif = periodic_orbit_at(&d, fold.section, fold.energy, 1e-8, &opts)?;
    let target = match far_cfg {
        FarTarget::Multiple(k) => k * fold.energy,
        FarTarget::EnergyCm1(e) => cm1_to_hartree(e),
    };
    let mut up_opts = down_opts;
    up_opts.e_direction = 1.0;
    up_opts.e_scale = up_scale;
    up_opts.e_max = 1.02 * target;
    let up = continue_branch(&d, &up_opts)?;
    let far = orbit_on_branch(&d, &up, target, run)?;
    if far.stability != Stability::Unstable {
        return Err(WorkbenchError::Numeric(format!(
            "orbit at the far energy has tr M = {} ({}), expected the unstable member",
            far.trace,
            far.stability.as_str()
        )));
    }
    let unit = run.unit();
    let stable_side: Vec<_> = down.points[fold.after_point + 1..].to_vec();
    let report = BifurcationReport {
        config_hash: run.hash.clone(),
        energy_unit: unit,
        e_bif: run.in_report_unit(fold.energy),
        e_bif_hartree: fold.energy,
        trace_at_fold: fold.trace,
        fold_psi_deg: fold.section.psi.to_degrees(),
        fold_p_psi_au: fold.section.p_psi,
        stability_loss: down.stability_loss.map(|e| run.in_report_unit(e)),
        unstable_psi_direction: psi_direction(&up.points),
        stable_psi_direction: psi_direction(&stable_side),
        bif_orbit: OrbitSummary::of(&bif, unit),
        far_orbit: OrbitSummary::of(&far, unit),
        down_branch_points: down.points.len(),
        up_branch_points: up.points.len(),
    };
    let s = &mut run.store;
    s.write_json(ORBITS, "orbits/branch_down.json", &down)?;
    s.write_json(ORBITS, "orbits/branch_up.json", &up)?;
    s.write(ORBITS, "orbits/branch.csv", &branch_table(&down, &up).to_bytes())?;
    s.write_json(ORBITS, "orbits/working.json", &WorkingOrbits { bif, far })?;
    s.write_json(ORBITS, "orbits/bifurcation.json", &report)?;
    Ok(())
}

/// `(label, energy)` pairs to section.
pub fn sos_energies(cfg: &RunConfig, orbits: &WorkingOrbits) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = cfg
        .sos
        .targets
        .iter()
        .map(|t| (t.clone(), if t == "bif" { orbits.bif.energy } else { orbits.far.energy }))
        .collect();
    out.extend(cfg.sos.energies_cm1.iter().map(|&e| (format!("e{e}"), cm1_to_hartree(e))));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosSummary {
    pub label: String,
    pub energy_hartree: f64,
    pub energy: f64,
    pub trajectories: usize,
    pub points: usize,
    /// Trajectories that stopped early, with the reason.
    pub terminated: Vec<(usize, String)>,
}

pub fn run_sos(run: &mut Run) -> Result<()> {
    let orbits = run.working_orbits()?;
    let energies = sos_energies(&run.cfg, &orbits);
    let (n, iters, seed) = (run.cfg.sos.trajectories, run.cfg.sos.iterations, run.cfg.seed);
    let crossing = run.cfg.integrator.crossing;
    let d = run.dynamics()?.clone();
    let mut summaries = Vec::new();
    let mut markers = Table::new(&["label", "energy_hartree", "psi_rad", "p_psi_au", "trace"])
        .note("fixed points of the working orbits on their sections");
    for (label, e) in energies {
        let trajs = composite_section(&d, &SosOptions { energy: e, trajectories: n, iterations: iters, seed });
        let mut t = Table::new(&["trajectory", "psi_rad", "p_psi_au"])
            .note(format!("energy_hartree = {e}"))
            .note(format!("energy_cm1 = {}", hartree_to_cm1(e)))
            .note(format!("crossing = {crossing:?}, seed = {seed}"));
        for tr in &trajs {
            for p in &tr.points {
                t.push(vec![tr.index.to_string(), p.psi.to_string(), p.p_psi.to_string()]);
            }
        }
        run.store.write(SOS, &format!("sos/sos_{label}.csv"), &t.to_bytes())?;
        for po in [&orbits.bif, &orbits.far].into_iter().filter(|po| po.energy == e) {
            markers.push(vec![
                label.clone(),
                e.to_string(),
                po.section.psi.to_string(),
                po.section.p_psi.to_string(),
                po.trace.to_string(),
            ]);
        }
        summaries.push(SosSummary {
            label,
            energy_hartree: e,
            energy: run.in_report_unit(e),
            trajectories: trajs.len(),
            points: trajs.iter().map(|t| t.points.len()).sum(),
            terminated: trajs.iter().filter_map(|t| t.terminated.clone().map(|r| (t.index, r))).collect(),
        });
    }
    run.store.write(SOS, "sos/fixed_points.csv", &markers.to_bytes())?;
    run.store.write_json(SOS, "sos/summary.json", &summaries)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungRecord {
    pub n: usize,
    pub hbar: f64,
    /// `n + ν/4`.
    pub quantum_number: f64,
    pub grid: GridSpec,
    pub t_e_au: f64,
    pub sigma_rad: f64,
    pub band: Option<Band>,
    pub spectrum_total_weight: f64,
    pub scar_mean_energy_hartree: f64,
    pub excluded: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub label: String,
    pub config_hash: String,
    pub energy_unit: EnergyUnit,
    pub energy: f64,
    pub energy_hartree: f64,
    pub orbit: OrbitSummary,
    pub ladder: BSLadder,
    pub alpha: f64,
    pub alpha_err: f64,
    pub prefactor: f64,
    pub classification: Classification,
    pub fit: ScalingFit,
    pub rungs: Vec<RungRecord>,
    pub failures: Vec<(usize, String)>,
}

pub fn rung_dir(label: &str, n: usize) -> String {
    format!("sweep/{label}/n{n:02}")
}

fn run_sweep(run: &mut Run, label: &str) -> Result<()> {
    let orbits = run.working_orbits()?;
    let po = if label == "bif" { orbits.bif } else { orbits.far };
    let rung = if label == "bif" { run.cfg.sweep.bif } else { run.cfg.sweep.far };
    let pcfg = run.cfg.sweep.pipeline(&rung);
    let stage = sweep_stage(label);
    let d = run.dynamics()?.clone();
    let ladder = BSLadder::from_orbit(&po, rung.ns())?;
    let res = superscar_pipeline(&d, &po, &ladder, &pcfg)?;
    let unit = run.unit();
    let masses = d.masses;
    let mut rungs = Vec::new();
    for job in &res.jobs {
        let dir = rung_dir(label, job.n);
        let mut spec = Table::new(&["energy_hartree", "density_per_hartree"])
            .note(format!("window_au = {}, hbar_au = {}", job.spectrum.window, job.spectrum.hbar));
        for (e, v) in job.spectrum.energies.iter().zip(&job.spectrum.density) {
            spec.push_numbers(&[*e, *v]);
        }
        run.store.write(stage, &format!("{dir}/spectrum.csv"), &spec.to_bytes())?;
        let mut ac = Table::new(&["t_au", "re", "im"]).note(format!("hbar_au = {}", job.autocorrelation.hbar));
        for (t, c) in job.autocorrelation.times().iter().zip(&job.autocorrelation.values) {
            ac.push_numbers(&[*t, c.re, c.im]);
        }
        run.store.write(stage, &format!("{dir}/autocorrelation.csv"), &ac.to_bytes())?;
        let mut prof = Table::new(&["r_bohr", "weight_per_bohr", "variance_rad2"]).note(format!("sigma_rad = {}", job.width.sigma));
        for ((r, w), v) in job.width.r.iter().zip(&job.width.weight).zip(&job.width.variance) {
            prof.push_numbers(&[*r, *w, *v]);
        }
        run.store.write(stage, &format!("{dir}/width_profile.csv"), &prof.to_bytes())?;
        run.store.write(stage, &format!("{dir}/scar.field"), &field_to_bytes(&job.scar.field, &masses))?;
        rungs.push(RungRecord {
            n: job.n,
            hbar: job.hbar,
            quantum_number: ladder.quantum_number(job.n),
            grid: job.grid,
            t_e_au: job.t_e,
            sigma_rad: job.width.sigma,
            band: job.band,
            spectrum_total_weight: job.spectrum.total_weight(),
            scar_mean_energy_hartree: job.scar.mean_energy,
            excluded: job.excluded.clone(),
            warnings: job.spectrum.warnings.clone(),
        });
    }
    let mut path = Table::new(&["r_bohr", "theta_rad"]).note(format!("orbit at {} hartree, one period", po.energy));
    for x in d.orbit_path(&po, PATH_SAMPLES) {
        path.push_numbers(&[x[0], x[1]]);
    }
    run.store.write(stage, &format!("sweep/{label}/orbit_path.csv"), &path.to_bytes())?;
    let mut widths = Table::new(&["n", "quantum_number", "hbar_au", "sigma_rad", "t_e_au", "included"]);
    for r in &rungs {
        widths.push(vec![
            r.n.to_string(),
            r.quantum_number.to_string(),
            r.hbar.to_string(),
            r.sigma_rad.to_string(),
            r.t_e_au.to_string(),
            u8::from(r.excluded.is_none()).to_string(),
        ]);
    }
    run.store.write(stage, &format!("sweep/{label}/widths.csv"), &widths.to_bytes())?;
    let report = SweepReport {
        label: label.to_string(),
        config_hash: run.hash.clone(),
        energy_unit: unit,
        energy: run.in_report_unit(po.energy),
        energy_hartree: po.energy,
        orbit: OrbitSummary::of(&po, unit),
        ladder,
        alpha: res.fit.alpha,
        alpha_err: res.fit.alpha_err,
        prefactor: res.fit.prefactor,
        classification: res.fit.classification,
        fit: res.fit,
        rungs,
        failures: res.failures,
    };
    run.store.write_json(stage, &format!("sweep/{label}/report.json"), &report)
}

pub fn run_sweep_bif(run: &mut Run) -> Result<()> {
    run_sweep(run, "bif")
}

pub fn run_sweep_far(run: &mut Run) -> Result<()> {
    run_sweep(run, "far")
}

pub fn run_plots(run: &mut Run) -> Result<()> {
    for stage in [ORBITS, SOS, SWEEP_BIF, SWEEP_FAR] {
        run.require(stage)?;
    }
    let orbits = run.working_orbits()?;
    let mut index = Vec::new();
    let mut put = |run: &mut Run, name: String, t: Table| -> Result<()> {
        let rel = format!("plots/{name}");
        run.store.write(PLOTS, &rel, &t.to_bytes())?;
        index.push(rel);
        Ok(())
    };

    for (label, _) in sos_energies(&run.cfg, &orbits) {
        let src = Table::parse(&run.store.read(&format!("sos/sos_{label}.csv"))?)?;
        let mut t = Table::new(&["psi_deg", "p_psi_au", "trajectory"]);
        t.preamble = src.preamble.clone();
        let (traj, psi, p) = (src.column("trajectory")?, src.column("psi_rad")?, src.column("p_psi_au")?);
        for k in 0..psi.len() {
            t.push(vec![psi[k].to_degrees().to_string(), p[k].to_string(), (traj[k] as usize).to_string()]);
        }
        put(run, format!("fig1_sos_{label}.csv"), t)?;
    }
    let markers = Table::parse(&run.store.read("sos/fixed_points.csv")?)?;
    let mut fp = Table::new(&["label", "psi_deg", "p_psi_au", "trace"]);
    let (psi, p, tr) = (markers.column("psi_rad")?, markers.column("p_psi_au")?, markers.column("trace")?);
    for k in 0..psi.len() {
        fp.push(vec![markers.rows[k][0].clone(), psi[k].to_degrees().to_string(), p[k].to_string(), tr[k].to_string()]);
    }
    put(run, "fig1_fixed_points.csv".into(), fp)?;

    for label in ["bif", "far"] {
        let report = run.sweep_report(label)?;
        for r in &report.rungs {
            let dir = rung_dir(label, r.n);
            let spec = Table::parse(&run.store.read(&format!("{dir}/spectrum.csv"))?)?;
            let mut t = Table::new(&["energy_cm1", "intensity_per_cm1"])
                .note(format!("n = {}, hbar_au = {}, working energy_cm1 = {}", r.n, r.hbar, hartree_to_cm1(report.energy_hartree)))
                .note(format!("total weight = {}", r.spectrum_total_weight));
            if let Some(b) = r.band {
                t = t.note(format!("band centre_cm1 = {}, band weight = {}", hartree_to_cm1(b.center), b.weight));
            }
            for (e, v) in spec.column("energy_hartree")?.iter().zip(spec.column("density_per_hartree")?) {
                t.push_numbers(&[hartree_to_cm1(*e), cm1_to_hartree(v)]);
            }
            put(run, format!("fig2_spectrum_{label}_n{:02}.csv", r.n), t)?;

            let field = field_from_bytes(&run.store.read(&format!("{dir}/scar.field"))?)?;
            let g = field.grid;
            let rho = field.density();
            let mut t = Table::new(&["r_bohr", "theta_rad", "density"])
                .note(format!("grid n_r = {}, n_theta = {}", g.n_r, g.n_theta))
                .note(format!("n = {}, hbar_au = {}", r.n, r.hbar));
            for j in 0..g.n_r {
                for m in 0..g.n_theta {
                    t.push_numbers(&[g.r(j), g.theta(m), rho[[j, m]]]);
                }
            }
            put(run, format!("fig3_density_{label}_n{:02}.csv", r.n), t)?;
        }
        let mut path = Table::parse(&run.store.read(&format!("sweep/{label}/orbit_path.csv"))?)?;
        path.preamble.push("overlay polyline for the density maps".into());
        put(run, format!("fig3_orbit_{label}.csv"), path)?;

        let fit = &report.fit;
        let mut t = Table::new(&["n", "quantum_number", "sigma_rad", "sigma_fit_rad", "ln_quantum_number", "ln_sigma", "ln_sigma_fit"])
            .note(format!(
                "alpha = {} +/- {}, prefactor = {}, {}",
                fit.alpha,
                fit.alpha_err,
                fit.prefactor,
                fit.classification.as_str()
            ));
        for (n, &(x, s)) in fit.ns.iter().zip(&fit.points) {
            let y = fit.predict(x);
            t.push(vec![
                n.to_string(),
                x.to_string(),
                s.to_string(),
                y.to_string(),
                x.ln().to_string(),
                s.ln().to_string(),
                y.ln().to_string(),
            ]);
        }
        put(run, format!("fig4_fit_{label}.csv"), t)?;
    }
    run.store.write_json(PLOTS, "plots/index.json", &index)?;
    Ok(())
}
