//! Drives the `dtn-toolkit` binary end to end.

use std::path::Path;
use std::process::Command;

fn toolkit(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dtn-toolkit")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = toolkit(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn version_names_the_crate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ok(&["--version"], dir.path()).starts_with("dtn-toolkit 0.1.0"));
}

#[test]
fn mesh_dtn_and_wentzell_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["mesh", "make", "--kind", "disk", "--refine", "1", "--out", "disk.m2"], d);
    let info: serde_json::Value = serde_json::from_str(&ok(&["mesh", "info", "disk.m2"], d)).unwrap();
    assert_eq!(info["boundary_loops"], 1);
    assert_eq!(info["euler_characteristic"], 1);

    ok(&["dtn", "spectrum", "--mesh", "disk.m2", "--out", "spec.csv"], d);
    let csv = std::fs::read_to_string(d.join("spec.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,re_lambda,im_lambda"));
    let first: Vec<f64> = lines.nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[1] + 1.0).abs() < 0.02, "{first:?}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("spec.json")).unwrap()).unwrap();
    assert_eq!(json["provenance"]["mesh_hash"], info["hash"]);

    ok(&["dtn", "sector", "--mesh", "disk.m2", "--angles", "90", "--out", "sector.json"], d);
    let sector: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("sector.json")).unwrap()).unwrap();
    let sup = sector["report"]["per_angle"][0]["sup"].as_f64().unwrap();
    assert!((sup - 1.0).abs() < 1e-4, "{sup}");

    ok(&["wentzell", "evolve", "--mesh", "disk.m2", "--times", "0,0.5", "--out", "traj.csv"], d);
    let traj = std::fs::read_to_string(d.join("traj.csv")).unwrap();
    assert!(traj.starts_with("t,vertex,re_u,im_u\n"));

    ok(&["wentzell", "solve", "--mesh", "disk.m2", "--lambda", "1", "--rhs", "-1", "--out", "w.csv"], d);
    let w = std::fs::read_to_string(d.join("w.csv")).unwrap();
    for line in w.lines().skip(1) {
        let re: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((re - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn assemble_dump_and_transform_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("p.toml"), "[geometry]\nkind = \"annulus\"\nrefinement = 0\n[coefficients]\na = \"1 + 0.5*x, 0, 0, 1\"\n").unwrap();
    ok(&["assemble", "dump", "--config", "p.toml", "--matrix", "K", "--out", "K.coo"], d);
    let coo = std::fs::read_to_string(d.join("K.coo")).unwrap();
    let row_sum: f64 = coo.lines().filter(|l| l.starts_with("0 ")).map(|l| l.split(' ').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!(row_sum.abs() < 1e-12);
    let report: serde_json::Value = serde_json::from_str(&ok(&["transform", "check", "--config", "p.toml"], d)).unwrap();
    assert_eq!(report["ellipticity"]["elliptic"], true);
}

#[test]
fn run_exit_status_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.toml"), "").unwrap();
    ok(&["run", "--config", "empty.toml", "--out-dir", "out"], d);
    assert!(d.join("out/report.json").exists());

    std::fs::write(d.join("bad.toml"), "[coefficients]\nbeta = \"1 + \"\n").unwrap();
    let out = toolkit(&["run", "--config", "bad.toml"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));

    std::fs::write(d.join("strict.toml"), "[geometry]\nrefinement = 0\n[experiments]\nlist = [\"robin-sweep\"]\n[tolerances]\nresolvent-identity-residual = 1e-300\n").unwrap();
    assert_eq!(toolkit(&["run", "--config", "strict.toml", "--out-dir", "strict"], d).status.code(), Some(1));
}
