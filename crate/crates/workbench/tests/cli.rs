mod common;

use common::*;
use std::process::Command;
use superscar::classical::PeriodicOrbit;
use superscar_workbench::config::RunConfig;
use superscar_workbench::stages::{BifurcationReport, SweepReport, WorkingOrbits};
use superscar_workbench::store::Manifest;
use superscar_workbench::tables::{field_from_bytes, Table};
use tempfile::tempdir;

fn read_table(path: std::path::PathBuf) -> Table {
    Table::parse(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn config_errors_exit_with_2_and_name_the_field() {
    let dir = tempdir().unwrap();
    let mut c = quick();
    c.masses.m_li = -7.0;
    c.sweep.bif.n_range = [2, 4];
    let path = write_config(dir.path(), &c);
    let out = superscar(&path, &["validate-config"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("masses.m_li: must be a positive number"), "{err}");
    assert!(err.contains("sweep.bif.n_range: [2, 4] gives 3 rungs"), "{err}");

    std::fs::write(&path, "seed = 1\n[surface]\nsurrogate = \"licn-surrogate\"\n").unwrap();
    assert_eq!(superscar(&path, &["orbits"]).status.code(), Some(2));
    assert_eq!(superscar(&dir.path().join("absent.toml"), &["sos"]).status.code(), Some(2));
}

#[test]
fn missing_inputs_exit_with_4() {
    let dir = tempdir().unwrap();
    let mut c = quick();
    c.surface.surrogate = None;
    c.surface.file = Some("no-such-coefficients.txt".into());
    let path = write_config(dir.path(), &c);
    let out = superscar(&path, &["validate-config"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    let path = write_config(dir.path(), &quick());
    let out = superscar(&path, &["export-plots"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("superscar orbits"));
}

#[test]
fn validate_config_reports_the_hash() {
    let dir = tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    let out = run_ok(&path, &["validate-config"]);
    let cfg = RunConfig::load(&path).unwrap();
    assert!(out.contains(&cfg.hash()));
    let reseeded = run_ok(&path, &["validate-config", "--seed", "5"]);
    assert!(!reseeded.contains(&cfg.hash()));
}

#[test]
fn sections_are_reproducible_and_on_the_energy_shell() {
    let dir = tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    run_ok(&path, &["sos", "--workers", "1"]);
    let root = run_dir(&path);
    let first: Vec<Vec<u8>> =
        ["bif", "far", "e2500"].iter().map(|l| std::fs::read(root.join(format!("sos/sos_{l}.csv"))).unwrap()).collect();
    let manifest = std::fs::read(root.join("manifest.json")).unwrap();

    run_ok(&path, &["sos", "--workers", "3"]);
    for (l, bytes) in ["bif", "far", "e2500"].iter().zip(&first) {
        assert_eq!(&std::fs::read(root.join(format!("sos/sos_{l}.csv"))).unwrap(), bytes, "{l}");
    }
    assert_eq!(std::fs::read(root.join("manifest.json")).unwrap(), manifest);

    let d = RunConfig::load(&path).unwrap().dynamics().unwrap();
    let low = read_table(root.join("sos/sos_e2500.csv"));
    let e = superscar::units::cm1_to_hartree(2500.0);
    let (psi, p) = (low.column("psi_rad").unwrap(), low.column("p_psi_au").unwrap());
    assert!(!psi.is_empty());
    for (a, b) in psi.iter().zip(&p) {
        let bound = d.p_psi_max(*a, e).expect("crossing inside the allowed region");
        assert!(b.abs() <= bound * (1.0 + 1e-9), "P_psi {b} beyond {bound} at psi {a}");
    }
}

#[test]
fn orbit_archive_and_bifurcation_report() {
    let dir = tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    run_ok(&path, &["orbits"]);
    let root = run_dir(&path);
    let text = std::fs::read_to_string(root.join("orbits/working.json")).unwrap();
    let orbits: WorkingOrbits = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&orbits).unwrap() + "\n", text);
    let far: PeriodicOrbit = serde_json::from_value(serde_json::to_value(&orbits.far).unwrap()).unwrap();
    assert_eq!(far, orbits.far);

    let r: BifurcationReport = serde_json::from_slice(&std::fs::read(root.join("orbits/bifurcation.json")).unwrap()).unwrap();
    assert!((r.trace_at_fold - 2.0).abs() <= 1e-3);
    assert!((r.bif_orbit.trace - 2.0).abs() <= 1e-3);
    assert_eq!((r.unstable_psi_direction, r.stable_psi_direction), (1.0, -1.0));
    assert!((r.far_orbit.energy_hartree / r.e_bif_hartree - 3.0).abs() < 1e-12);
    assert!(r.far_orbit.trace > 2.0);
}

#[test]
fn sweep_export_and_resume() {
    let dir = tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    let printed = run_ok(&path, &["scarsweep"]);
    assert!(printed.contains("bif: E =") && printed.contains("far: E ="), "{printed}");
    run_ok(&path, &["sos"]);
    run_ok(&path, &["export-plots"]);
    let root = run_dir(&path);
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(root.join("manifest.json")).unwrap()).unwrap();

    // every artifact once, every checksum verifies
    let mut paths: Vec<&str> = manifest.artifacts.iter().map(|a| a.path.as_str()).collect();
    paths.dedup();
    assert_eq!(paths.len(), manifest.artifacts.len());
    for a in &manifest.artifacts {
        let bytes = std::fs::read(root.join(&a.path)).unwrap();
        assert_eq!(superscar_workbench::store::sha256_hex(&bytes), a.sha256, "{}", a.path);
    }

    for label in ["bif", "far"] {
        let report: SweepReport =
            serde_json::from_slice(&std::fs::read(root.join(format!("sweep/{label}/report.json"))).unwrap()).unwrap();
        assert_eq!(report.rungs.len(), if label == "bif" { 4 } else { 5 });
        let fit = read_table(root.join(format!("plots/fig4_fit_{label}.csv")));
        let (x, y) = (fit.column("quantum_number").unwrap(), fit.column("sigma_fit_rad").unwrap());
        for (x, y) in x.iter().zip(&y) {
            assert!((y - report.fit.predict(*x)).abs() <= 1e-15 * y);
        }
        for r in &report.rungs {
            let heat = read_table(root.join(format!("plots/fig3_density_{label}_n{:02}.csv", r.n)));
            let field = field_from_bytes(&std::fs::read(root.join(format!("sweep/{label}/n{:02}/scar.field", r.n))).unwrap()).unwrap();
            assert_eq!(field.grid, r.grid);
            assert_eq!(heat.rows.len(), r.grid.n_r * r.grid.n_theta);
            let mut rs = heat.column("r_bohr").unwrap();
            rs.dedup();
            assert_eq!(rs.len(), r.grid.n_r);

            let spec = read_table(root.join(format!("plots/fig2_spectrum_{label}_n{:02}.csv", r.n)));
            let (e, i) = (spec.column("energy_cm1").unwrap(), spec.column("intensity_per_cm1").unwrap());
            let integral: f64 = (1..e.len()).map(|k| 0.5 * (e[k] - e[k - 1]) * (i[k] + i[k - 1])).sum();
            assert!((integral - r.spectrum_total_weight).abs() <= 1e-3, "{integral} vs {}", r.spectrum_total_weight);
        }
    }

    // resume skips verified stages and leaves the manifest untouched
    let before = std::fs::read(root.join("manifest.json")).unwrap();
    let out = superscar(&path, &["scarsweep", "--resume"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(root.join("manifest.json")).unwrap(), before);
    let timings_before = std::fs::read(root.join("timings.json")).unwrap();

    // a corrupted artifact makes its stage run again
    let victim = root.join("sweep/far/widths.csv");
    std::fs::write(&victim, "tampered").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_superscar"))
        .args(["scarsweep", "--resume", "--config"])
        .arg(&path)
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("stage sweep-bif: complete, reusing"), "{log}");
    assert!(log.contains("stage sweep-far: running"), "{log}");
    assert_eq!(std::fs::read(root.join("manifest.json")).unwrap(), before);
    assert_ne!(std::fs::read(root.join("timings.json")).unwrap(), timings_before);
}
