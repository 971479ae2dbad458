use std::path::Path;
use std::process::{Command, Output};

fn cvqnd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqnd")).args(args).arg("--out").arg(out).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn run_vacuum_posterior_and_distribution() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cvqnd(&["run", "--q", "0.7071067811865476", "--xm", "1", "--distribution"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&tmp.path().join("moments.json"));
    let mean_x = m["output"]["mean_x"].as_f64().unwrap();
    assert!((mean_x - 0.5).abs() < 1e-4);
    assert!((m["output"]["var_x"].as_f64().unwrap() - 0.125).abs() < 1e-6);

    let rows = csv_rows(&tmp.path().join("distribution.csv"));
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for col in [1, 2] {
        let p: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        assert!((cvqnd::grid::trapezoid_nonuniform(&xs, &p) - 1.0).abs() < 1e-5);
    }
    let state = std::fs::read_to_string(tmp.path().join("output_state.csv")).unwrap();
    assert!(state.starts_with("x,re,im,abs2\n"));
    assert_eq!(state.lines().count(), 1025);
}

#[test]
fn wigner_of_single_photon_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"input": {"kind": "fock", "n": 1}, "q": 0.6, "wigner_grid": {"half_width": 3, "points": 31}}"#).unwrap();
    let o = cvqnd(&["run", "--config", cfg.to_str().unwrap(), "--wigner"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("wigner_input.csv"));
    assert_eq!(rows.len(), 31 * 31);
    let origin = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    assert!((origin[2] + 2.0 / std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn ensemble_exact_mode_backaction() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_trajectories": 0, "q": 0.6}"#).unwrap();
    let o = cvqnd(&["ensemble", "--config", cfg.to_str().unwrap(), "--seed", "1"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&tmp.path().join("ensemble_stats.json"));
    let d = cvqnd::protocol::resolution_from_q(0.6).unwrap();
    let want = 0.25 + 1.0 / (16.0 * d * d);
    assert!((s["nonselective_var_p"]["value"].as_f64().unwrap() - want).abs() < 1e-3);
    assert_eq!(s["mode"], "exact");
    let traj = std::fs::read_to_string(tmp.path().join("trajectories.csv")).unwrap();
    assert_eq!(traj, "trajectory,x_m,mean_x_out,mean_p_out\n");
}

#[test]
fn sampled_ensemble_writes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cvqnd(&["ensemble", "--seed", "5", "--q", "0.8", "--config", "/dev/null"], tmp.path());
    // an empty file is not a JSON document
    assert_eq!(o.status.code(), Some(2));
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_trajectories": 25}"#).unwrap();
    let o = cvqnd(&["ensemble", "--seed", "5", "--q", "0.8", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success());
    let rows = csv_rows(&tmp.path().join("trajectories.csv"));
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[24][0], 24.0);
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cvqnd(&["ensemble"], tmp.path()).status.code(), Some(2), "missing seed");
    assert_eq!(cvqnd(&["run", "--q", "1.5"], tmp.path()).status.code(), Some(2));
    assert_eq!(cvqnd(&["run", "--n-points", "8"], tmp.path()).status.code(), Some(2));
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"grid": {"x_min": -4, "x_max": 8, "n_points": 256}}"#).unwrap();
    assert_eq!(cvqnd(&["run", "--config", cfg.to_str().unwrap()], tmp.path()).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_cvqnd"))
        .args(["run", "--out"])
        .arg(tmp.path())
        .env("CVQND_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(cvqnd(&["frobnicate"], tmp.path()).status.code(), Some(2));
}

#[test]
fn small_verify_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"verify": {"inputs": [{"kind": "vacuum"}, {"kind": "fock", "n": 2}], "q_values": [0.4], "x_m_values": [0.3, -1.0]}}"#,
    )
    .unwrap();
    let o = cvqnd(&["verify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(tmp.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("input_label,q,x_m,r7,r11,r12,n_points\n"));
    assert_eq!(csv.lines().count(), 5);
    let s = json(&tmp.path().join("verify_summary.json"));
    assert_eq!(s["pass"], true);
    assert!(s["max_residual"].as_f64().unwrap() < 1e-4);

    let o = cvqnd(&["verify", "--config", cfg.to_str().unwrap(), "--n-points", "64"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let s = json(&tmp.path().join("verify_summary.json"));
    assert_eq!(s["pass"], false);
    assert!(s["max_residual"].as_f64().unwrap() > 1e-4);
}
