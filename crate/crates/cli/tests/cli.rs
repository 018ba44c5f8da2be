use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn solwave(args: &[&str], out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_solwave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status;
    status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn check_cubic_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solwave(&["check"], dir.path()), 0);
    let report = json(&dir.path().join("conditions.json"));
    for key in ["g1", "g2", "g3", "g4", "g5"] {
        assert_eq!(report[key]["verdict"], "pass", "{key}");
    }
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config"]["command"], "check");
    assert_eq!(manifest["config"]["nonlinearity"]["p"], 4.0);
    assert_eq!(manifest["status"], "ok");
    assert!(manifest.get("timestamp").is_none());
}

#[test]
fn check_critical_power_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let code = solwave(&["check", "--nl", r#"{"family":"combined_power","a":1,"p":6}"#], dir.path());
    assert_eq!(code, 1);
    let report = json(&dir.path().join("conditions.json"));
    assert_eq!(report["g2"]["verdict"], "fail");
    assert_eq!(report["g2"]["witness"]["exponent"], 6.0);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family": "combined_power", "a": "#).unwrap();
    assert_eq!(solwave(&["check", "--nl-file", bad.to_str().unwrap()], &dir.path().join("a")), 2);
    assert_eq!(solwave(&["check", "--config", bad.to_str().unwrap()], &dir.path().join("b")), 2);
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"omegaa": 1}"#).unwrap();
    assert_eq!(solwave(&["profile", "--config", unknown.to_str().unwrap()], &dir.path().join("c")), 2);
    assert_eq!(solwave(&["mass-curve", "--omega-min", "2", "--omega-max", "1"], &dir.path().join("d")), 2);
    assert_eq!(solwave(&["minimize", "--n", "1000"], &dir.path().join("e")), 2);
    assert_eq!(solwave(&["profile", "--no-such-flag"], &dir.path().join("f")), 2);
}

#[test]
fn mass_curve_matches_the_cubic_law() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solwave(&["mass-curve", "--omega-min", "0.25", "--omega-max", "4", "--samples", "16"], dir.path()), 0);
    let (header, rows) = csv_rows(&dir.path().join("mass_curve.csv"));
    assert_eq!(header, "omega,lambda,dlambda");
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!((r[1] - 4.0 * r[0].sqrt()).abs() < 1e-5);
        assert!(r[2] > 0.0);
    }
}

#[test]
fn sweeps_do_not_depend_on_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let nl = r#"{"family":"combined_power","a":1,"b":1,"p":3,"q":5}"#;
    let args = ["mass-curve", "--nl", nl, "--omega-min", "0.05", "--omega-max", "0.7", "--samples", "12"];
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    let again = dir.path().join("again");
    assert_eq!(solwave(&[&args[..], &["--jobs", "1"]].concat(), &one), 0);
    assert_eq!(solwave(&[&args[..], &["--jobs", "4"]].concat(), &four), 0);
    assert_eq!(solwave(&[&args[..], &["--jobs", "1"]].concat(), &again), 0);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    for file in ["mass_curve.csv", "mass_curve.json"] {
        assert_eq!(read(&one, file), read(&four, file), "{file}");
    }
    assert_eq!(read(&one, "manifest.json"), read(&again, "manifest.json"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"omega_min": 0.5, "omega_max": 2.0, "samples": 4, "seed": 9}"#).unwrap();
    let out = dir.path().join("out");
    assert_eq!(solwave(&["mass-curve", "--config", cfg.to_str().unwrap(), "--samples", "5"], &out), 0);
    let (_, rows) = csv_rows(&out.join("mass_curve.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[4][0], 2.0);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["config"]["samples"], 5);
}

#[test]
fn minimize_reports_the_ground_state_energy() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solwave(&["minimize", "--lambda", "4"], dir.path()), 0);
    let summary = json(&dir.path().join("minimizer.json"));
    assert!((summary["I"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-3);
    assert!((summary["omega"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(dir.path().join("minimizer.bin").exists());
}

#[test]
fn evolve_trace_conserves_mass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solwave(&["evolve", "--t-final", "10", "--dt", "1e-3", "--eps", "0"], dir.path()), 0);
    let (header, rows) = csv_rows(&dir.path().join("trace.csv"));
    assert_eq!(header, "t,E,M,dist");
    let m0 = rows[0][2];
    let drift = rows.iter().map(|r| (r[2] - m0).abs() / m0).fold(0.0, f64::max);
    assert!(drift < 1e-12, "{drift}");
    assert!((rows.last().unwrap()[0] - 10.0).abs() < 1e-9);
}

#[test]
fn spectrum_reports_the_negative_direction() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solwave(&["spectrum", "--n", "2048"], dir.path()), 0);
    let report = json(&dir.path().join("spectrum.json"));
    assert!((report["lowest_even"][0].as_f64().unwrap() + 3.0).abs() < 1e-2);
    assert_eq!(report["certified"], true);
    let (header, rows) = csv_rows(&dir.path().join("eigen_even_0.csv"));
    assert_eq!(header, "x,re,im");
    assert_eq!(rows.len(), 2048);
}

#[test]
fn stability_writes_one_entry_per_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["stability", "--t-final", "2", "--n", "256", "--kinds", "amplitude,phase-ramp", "--eps", "0,0.01"];
    assert_eq!(solwave(&args, dir.path()), 0);
    let report = json(&dir.path().join("stability.json"));
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        for key in ["eps", "kind", "sup_dist", "ratio"] {
            assert!(e.get(key).is_some());
        }
    }
}
