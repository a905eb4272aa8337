//! Batch driver for the superscar pipeline.
//!
//! One TOML file ([`config::RunConfig`]) describes a run; every command
//! writes into the run directory keyed by the config hash and records its
//! artifacts in `manifest.json` ([`store`]). Commands reuse completed
//! upstream stages, and `--resume` also skips the requested stages when
//! their outputs verify.

pub mod config;
pub mod error;
pub mod stages;
pub mod store;
pub mod tables;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::Result;
use stages::{Run, ORBITS, PLOTS, SOS, SWEEP_BIF, SWEEP_FAR};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "superscar", version, about = "Periodic orbits, surfaces of section and scar-width sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config's RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Skip requested stages whose outputs are complete and verify.
    #[arg(long, global = true)]
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Composite surfaces of section at the working energies.
    Sos,
    /// Continue the orbit family, locate the fold and the far orbit.
    Orbits,
    /// ħ sweeps and width fits at both working energies.
    Scarsweep,
    /// Plot-ready series from a finished run.
    ExportPlots,
    /// Check the config and print its hash.
    ValidateConfig,
}

/// Loads the config named on the command line and applies overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| error::WorkbenchError::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs one command and returns the lines to print.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let cfg = load_config(cli)?;
    if cli.command == Command::ValidateConfig {
        cfg.surface()?;
        return Ok(vec![
            "config ok".into(),
            format!("hash {}", cfg.hash()),
            format!("run directory {}", store::RunStore::run_dir(&cfg).display()),
        ]);
    }
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let command = cli.command;
    let force = !cli.resume;
    superscar::par::with_workers(workers, move || run_command(cfg, command, force))
}

pub fn run_command(cfg: RunConfig, command: Command, force: bool) -> Result<Vec<String>> {
    let mut run = Run::open(cfg, force)?;
    let mut out = vec![format!("run directory {}", run.store.root().display())];
    match command {
        Command::Orbits => {
            run.stage(ORBITS, true, stages::run_orbits)?;
            let r: stages::BifurcationReport = run.store.read_json("orbits/bifurcation.json")?;
            let u = r.energy_unit.as_str();
            out.push(format!("E_bif = {:.4} {u} (tr M = {:.6}, psi = {:.3} deg)", r.e_bif, r.trace_at_fold, r.fold_psi_deg));
            out.push(format!(
                "far orbit: E = {:.4} {u}, tr M = {:.4}, S = {:.5}, nu = {}",
                r.far_orbit.energy, r.far_orbit.trace, r.far_orbit.reduced_action_au, r.far_orbit.maslov
            ));
        }
        Command::Sos => {
            run.stage(ORBITS, false, stages::run_orbits)?;
            run.stage(SOS, true, stages::run_sos)?;
            let s: Vec<stages::SosSummary> = run.store.read_json("sos/summary.json")?;
            for x in s {
                out.push(format!("{}: {} crossings from {} trajectories", x.label, x.points, x.trajectories));
            }
        }
        Command::Scarsweep => {
            run.stage(ORBITS, false, stages::run_orbits)?;
            run.stage(SWEEP_BIF, true, stages::run_sweep_bif)?;
            run.stage(SWEEP_FAR, true, stages::run_sweep_far)?;
            for label in ["bif", "far"] {
                let r = run.sweep_report(label)?;
                out.push(format!(
                    "{label}: E = {:.4} {}, alpha = {:.4} +/- {:.4} ({})",
                    r.energy,
                    r.energy_unit.as_str(),
                    r.alpha,
                    r.alpha_err,
                    r.classification.as_str()
                ));
            }
        }
        Command::ExportPlots => {
            run.stage(PLOTS, true, stages::run_plots)?;
            out.push(format!("{} plot series written", run.store.artifacts_of(PLOTS).len()));
        }
        Command::ValidateConfig => unreachable!("handled before the run directory is opened"),
    }
    Ok(out)
}
