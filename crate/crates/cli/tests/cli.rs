use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ophydro(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ophydro"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = ophydro(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn spectrum_of_transfer_matches_analytic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum", "--p", "0.8", "--L", "64"], dir.path());
    let csv = read(dir.path(), "spectrum.csv");
    let num = column(&csv, "eigenvalue");
    let ana = column(&csv, "analytic");
    assert_eq!(num.len(), 64);
    for (a, b) in num.iter().zip(&ana) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn stochastic_corner_block_has_unit_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum", "--p", "0.8", "--L", "100", "--ell", "100", "--cprime", "stochastic"], dir.path());
    let top = column(&read(dir.path(), "spectrum.csv"), "eigenvalue")[0];
    assert!((top - 1.0).abs() < 1e-12, "{top}");
}

#[test]
fn dissipative_spectrum_writes_leading_vector() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum", "--p", "0.8", "--L", "500", "--gamma", "0.006"], dir.path());
    let top = column(&read(dir.path(), "spectrum.csv"), "eigenvalue")[0];
    assert!((top - 0.6107116266).abs() < 1e-9);
    let v = column(&read(dir.path(), "eigenvector.csv"), "value");
    assert_eq!(v.len(), 500);
    assert!(v.iter().all(|&x| x >= 0.0));
    let m = json(dir.path(), "manifest.json");
    assert_eq!(m["summary"]["argmax"], 82);
}

#[test]
fn conflicting_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = ophydro(&["spectrum", "--p", "0.8", "--L", "100", "--gamma", "0.1", "--ell", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ophydro(&["spectrum", "--p", "0.8", "--L", "10", "--ell", "20"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ophydro(&["spectrum", "--p", "1.5", "--L", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn autocorr_plateau_and_fitted_rate() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["autocorr", "--p", "0.75", "--L", "28", "--n", "1", "--steps", "400", "--svg"], dir.path());
    let csv = read(dir.path(), "series.csv");
    let plateau = column(&csv, "plateau")[0];
    assert!((plateau / 1.5286206519599798e-26 - 1.0).abs() < 1e-12);
    let values = column(&csv, "value");
    assert_eq!(values.len(), 401);
    assert!((values[400] / plateau - 1.0).abs() < 1e-6);
    let fit = json(dir.path(), "fit.json");
    let rate = fit["exact"]["rate"].as_f64().unwrap();
    let want = -(4.0f64 * 0.75 * 0.25).ln();
    assert!((rate / want - 1.0).abs() < 0.01, "{rate}");
    assert!(read(dir.path(), "series.svg").starts_with("<svg"));
}

#[test]
fn autocorr_zero_steps_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["autocorr", "--p", "0.75", "--L", "28", "--steps", "0"], dir.path());
    let csv = read(dir.path(), "series.csv");
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(column(&csv, "value"), vec![1.0]);
    assert!(!dir.path().join("fit.json").exists());
}

#[test]
fn autocorr_rejects_start_beyond_l() {
    let dir = tempfile::tempdir().unwrap();
    let o = ophydro(&["autocorr", "--p", "0.75", "--L", "28", "--n", "29", "--steps", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gamma_scan_curves() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["scan-gamma", "--p", "0.8", "--L-list", "100,1000", "--gamma-grid", "1e-3:1e-1:7", "--svg"],
        dir.path(),
    );
    let csv = read(dir.path(), "scan.csv");
    let ls = column(&csv, "L");
    let gs = column(&csv, "gamma");
    let lams = column(&csv, "lambda_max");
    assert_eq!(lams.len(), 14);
    // γL = 0.1: the boundary mode at x = L dominates and sits near 1.
    assert!(lams[0] > 0.9);
    for i in 7..14 {
        assert_eq!(ls[i], 1000.0);
        assert!(lams[i] <= (-gs[i]).exp() * 0.64 + 1e-5);
        if i > 7 {
            assert!(lams[i] < lams[i - 1]);
        }
    }
    assert!(read(dir.path(), "scan.svg").contains("stroke-dasharray"));
}

#[test]
fn gamma_zero_is_stochastic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["scan-gamma", "--p", "0.8", "--L-list", "60", "--gamma-grid", "0"], dir.path());
    let lam = column(&read(dir.path(), "scan.csv"), "lambda_max")[0];
    assert!((lam - 1.0).abs() < 1e-12);
}

#[test]
fn gamma_scan_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = ophydro(&["scan-gamma", "--p", "0.8", "--L-list", "60", "--gamma-grid", ","], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn counterexample_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["counterexample", "--p", "0.6", "--epsilon-list", "0,0.02,0.05"], dir.path());
    let csv = read(dir.path(), "table.csv");
    for v in column(&csv, "v_b") {
        assert!((v - 0.9).abs() < 1e-14);
    }
    for d in column(&csv, "d") {
        assert!((d - 0.75).abs() < 1e-14);
    }
    let lim = column(&csv, "eigenvalue_limit");
    for (l, want) in lim.iter().zip([0.4, 0.38, 0.35]) {
        assert!((l - want).abs() < 1e-14);
    }
    let third = column(&csv, "third_moment");
    assert!(third[0] != third[1] && third[1] != third[2]);

    let o = ophydro(&["counterexample", "--p", "0.6", "--epsilon-list", "0.2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ruc_trivial_run_is_a_delta() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["ruc-compare", "--qubits", "6", "--depth", "0", "--realizations", "1", "--seed", "3"], dir.path());
    let means = column(&read(dir.path(), "profiles.csv"), "mean");
    assert_eq!(means, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(json(dir.path(), "report.json")["comparison"].is_null());
}

#[test]
fn ruc_front_velocity() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["ruc-compare", "--qubits", "12", "--depth", "8", "--realizations", "200", "--seed", "7"], dir.path());
    let r = json(dir.path(), "report.json");
    let v = r["front_velocity_ruc"].as_f64().unwrap();
    assert!((v / 0.6 - 1.0).abs() < 0.15, "{v}");
}

#[test]
fn ruc_resource_guard() {
    let dir = tempfile::tempdir().unwrap();
    let o = ophydro(&["ruc-compare", "--qubits", "13", "--depth", "2", "--realizations", "1", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["ruc-compare", "--qubits", "8", "--depth", "5", "--realizations", "60", "--seed", "21"];
    ok(&args, a.path());
    let o = Command::new(env!("CARGO_BIN_EXE_ophydro"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("OPHYDRO_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["profiles.csv", "comparison.csv", "report.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn manifest_lists_every_output_and_replays() {
    let root = tempfile::tempdir().unwrap();
    let run = root.path().join("run");
    ok(&["autocorr", "--p", "0.8", "--L", "40", "--steps", "120", "--svg"], &run);
    let m = json(&run, "manifest.json");
    assert_eq!(m["command"], "autocorr");
    assert_eq!(m["params"]["L"], 40);
    let mut listed: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap().to_string())
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> = fs::read_dir(&run)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    present.sort();
    assert_eq!(listed, present);

    let replay = root.path().join("again");
    let o = Command::new(env!("CARGO_BIN_EXE_ophydro"))
        .args(["replay", run.to_str().unwrap(), "--out", replay.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in &listed {
        if name != "manifest.json" {
            assert_eq!(fs::read(run.join(name)).unwrap(), fs::read(replay.join(name)).unwrap());
        }
    }
}

#[test]
fn replay_detects_altered_outputs() {
    let root = tempfile::tempdir().unwrap();
    let run = root.path().join("run");
    ok(&["counterexample", "--p", "0.6", "--epsilon-list", "0,0.05"], &run);
    fs::write(run.join("table.csv"), "tampered\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ophydro"))
        .args(["replay", run.join("manifest.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("table.csv"));
}
