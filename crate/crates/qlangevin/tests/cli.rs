use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qlangevin::modelfile::save_model;
use qlangevin::random::{random_model, rng};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_qlangevin");

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> i32 {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn random_model_file(dir: &Path, seed: u64, d: usize, n: usize, norm: f64) -> String {
    let path = dir.join(format!("random_{seed}_{d}_{n}.json"));
    save_model(&random_model(&mut rng(seed), d, n, norm).unwrap(), &path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn coeffs_exit_codes_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coeffs.csv");
    let out_s = out.to_str().unwrap();
    let m = random_model_file(dir.path(), 11, 2, 2, 0.4);
    assert_eq!(run(&["coeffs", "--model", &m, "--out", out_s]), 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "i,j,k,l,epsilon,residual_at_smallest_tau,fitted_order,extrapolated_residual"
    );
    assert_eq!(lines.count(), 81);
    assert_eq!(run(&["coeffs", "--model", &m, "--out", out_s, "--tol", "1e-9"]), 3);

    assert_eq!(run(&["coeffs", "--model", &model("decoupled.json"), "--out", out_s]), 0);
    let report = json(&dir.path().join("coeffs.csv.json"));
    assert!(report["max_residual"].as_f64().unwrap() <= 5e-3);
    assert_eq!(run(&["coeffs", "--model", &m, "--out", out_s, "--taus", "0.1,0.2,0.05,0.01"]), 2);
}

#[test]
fn converge_footer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let m = random_model_file(dir.path(), 12, 2, 1, 1.0);
    assert_eq!(run(&["converge", "--model", &m, "--out", out.to_str().unwrap(), "--seed", "3"]), 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "tau,n_steps,trace_distance");
    assert_eq!(rows.len(), 6);
    assert!(rows[5].starts_with("slope,,"));
    let report = json(&dir.path().join("conv.csv.json"));
    assert_eq!(report["initial_state"]["rng"], "ChaCha8Rng");
    assert_eq!(report["initial_state"]["seed"], 3);
    assert_eq!(
        run(&["converge", "--model", &m, "--out", out.to_str().unwrap(), "--min-slope", "5"]),
        3
    );
}

#[test]
fn thermalize_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("th.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(&["thermalize", "--model", &model("thermal_three_level.json"), "--out", out_s]), 0);
    let r = json(&out);
    for key in [
        "invariant_residual",
        "stationary_count",
        "commutant_dim_with_H",
        "commutant_dim_without_H",
        "spectral_gap",
        "fitted_rate",
        "final_distance",
    ] {
        assert!(!r[key].is_null(), "{key}");
    }
    assert!(r["invariant_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["stationary_count"], 1);

    assert_eq!(run(&["thermalize", "--model", &model("qubit_ladder.json"), "--out", out_s]), 0);
    assert!((json(&out)["spectral_gap"].as_f64().unwrap() - 0.5).abs() <= 1e-10);

    assert_eq!(run(&["thermalize", "--model", &model("dephasing.json"), "--out", out_s]), 3);
    assert!(json(&out)["stationary_count"].as_u64().unwrap() > 1);
}

#[test]
fn oracle_runs_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle.json");
    let out_s = out.to_str().unwrap();
    let m = random_model_file(dir.path(), 13, 2, 1, 0.8);
    assert_eq!(run(&["oracle", "--model", &m, "--out", out_s, "--k", "0"]), 0);
    assert_eq!(json(&out)["max_deviation"].as_f64().unwrap(), 0.0);
    assert_eq!(run(&["oracle", "--model", &m, "--out", out_s, "--k", "4"]), 0);
    let r = json(&out);
    assert_eq!(r["k"], 4);
    assert!(r["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(run(&["oracle", "--model", &m, "--out", out_s, "--k", "20"]), 4);
}

#[test]
fn ito_check_and_degenerate_bath() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ito.csv");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(&["ito-check", "--model", &model("thermal_three_level.json"), "--out", out_s]), 0);
    let r = json(&dir.path().join("ito.csv.json"));
    assert!(r["max_coth_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["thermal_unitarity_accepted"], 100);

    let flat = dir.path().join("flat.json");
    fs::write(
        &flat,
        r#"{"system": {"dim": 2, "H_S": [[[0,0],[0,0]],[[0,0],[1,0]]]},
            "bath": {"gamma": [0, 1], "state": {"type": "gibbs", "beta": 0.0}},
            "coupling": {"type": "ladder"}}"#,
    )
    .unwrap();
    assert_eq!(run(&["ito-check", "--model", flat.to_str().unwrap(), "--out", out_s]), 2);
}

#[test]
fn evolve_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev.csv");
    let out_s = out.to_str().unwrap();
    let m = model("qubit_ladder.json");
    assert_eq!(run(&["evolve", "--model", &m, "--out", out_s, "--initial", "1", "--points", "11"]), 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next().unwrap(), "t,p_0,p_1,re_0_1,im_0_1,trace_distance_to_stationary");
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][..5], [0.0, 0.0, 1.0, 0.0, 0.0]);

    assert_eq!(run(&["spectrum", "--model", &m, "--out", out_s]), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).any(|l| {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        v[0].hypot(v[1]) <= 1e-9
    }));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(&["spectrum", "--model", "/nonexistent/model.json", "--out", out_s]), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["spectrum", "--model", bad.to_str().unwrap(), "--out", out_s]), 2);
    assert_eq!(run(&["spectrum", "--model", &model("qubit_ladder.json")]), 2);
    assert_eq!(run(&["oracle", "--model", &model("qubit_ladder.json"), "--out", out_s, "--initial", "7"]), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = random_model_file(dir.path(), 14, 2, 2, 0.4);
    for cmd in ["coeffs", "converge", "ito-check", "oracle"] {
        let a = dir.path().join(format!("{cmd}_a"));
        let b = dir.path().join(format!("{cmd}_b"));
        let extra: &[&str] = match cmd {
            "oracle" => &["--k", "2", "--seed", "5"],
            "coeffs" => &[],
            _ => &["--seed", "5"],
        };
        for out in [&a, &b] {
            let mut args = vec![cmd, "--model", &m, "--out", out.to_str().unwrap()];
            args.extend_from_slice(extra);
            run(&args);
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{cmd}");
    }
}
