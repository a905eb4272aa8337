#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use superscar_workbench::config::RunConfig;

pub const DESK: &str = include_str!("../../configs/desk.toml");

pub fn desk() -> RunConfig {
    RunConfig::parse(DESK).unwrap()
}

/// Desk physics with short sections and sweeps.
pub fn quick() -> RunConfig {
    let mut c = desk();
    c.sos.trajectories = 6;
    c.sos.iterations = 60;
    c.sos.energies_cm1 = vec![2500.0];
    c.sweep.bif.n_range = [2, 5];
    c.sweep.far.n_range = [3, 7];
    c
}

/// Writes `cfg` into `dir` with its outputs under `dir/runs`.
pub fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let mut c = cfg.clone();
    c.output_dir = "runs".into();
    let path = dir.join("run.toml");
    std::fs::write(&path, c.to_toml()).unwrap();
    path
}

pub fn superscar(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superscar"))
        .args(args)
        .arg("--config")
        .arg(config)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

pub fn run_ok(config: &Path, args: &[&str]) -> String {
    let out = superscar(config, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// The run directory of the config at `path`.
pub fn run_dir(path: &Path) -> PathBuf {
    superscar_workbench::store::RunStore::run_dir(&RunConfig::load(path).unwrap())
}
