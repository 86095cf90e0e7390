use std::process::{Command, Output};

use serde_json::Value;

fn rotorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotorlab"))
        .args(args)
        .env_remove("ROTORLAB_SEED")
        .output()
        .expect("binary runs")
}

fn reports(out: &Output) -> Vec<Value> {
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report document");
    v.as_array().expect("array of reports").clone()
}

fn num(v: &Value, key: &str) -> f64 {
    v["details"][key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn casimir_rotator_reference_point() {
    let out = rotorlab(&["casimir", "--f", "rotator", "--Q", "4"]);
    assert!(out.status.success());
    let r = &reports(&out)[0];
    assert_eq!(r["status"], "pass");
    assert!((num(r, "PP") - 1.0).abs() < 1e-12);
    assert!((num(r, "WW") + 0.25).abs() < 1e-12);
}

#[test]
fn casimir_point_particle() {
    let out = rotorlab(&["casimir", "--f", "1", "--Q", "1"]);
    assert!(out.status.success());
    let r = &reports(&out)[0];
    assert_eq!(num(r, "PP"), 1.0);
    assert_eq!(num(r, "WW"), 0.0);
}

#[test]
fn casimir_nu_family_is_fundamental() {
    let out = rotorlab(&["casimir", "--f", "nu_family", "--nu", "0.5", "--P", "0.2", "--Q", "0.3"]);
    assert!(out.status.success());
    let r = &reports(&out)[0];
    assert!(num(r, "fundamental_pp_residual") <= 1e-10);
    assert!(num(r, "fundamental_ww_residual") <= 1e-10);
}

#[test]
fn parse_errors_exit_nonzero_with_position() {
    let out = rotorlab(&["casimir", "--f", "sqrt(Q", "--Q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax error at byte"), "{err}");
}

#[test]
fn hessian_rank_of_nu_family() {
    let out = rotorlab(&["hessian", "--f", "nu_family", "--nu", "0.3", "--state", "random", "--seed", "3", "--expect-rank", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(reports(&out)[0]["details"]["hessian"]["rank"], 4);
}

#[test]
fn fundamental_check_fails_for_nonfundamental_form() {
    assert_eq!(rotorlab(&["fundamental-check", "--f", "Q"]).status.code(), Some(1));
    assert!(rotorlab(&["fundamental-check", "--f", "starlike", "--inner", "-"]).status.success());
}

#[test]
fn relation_default_forms() {
    let out = rotorlab(&["relation", "--states", "3"]);
    assert!(out.status.success());
}

#[test]
fn freemotion_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = rotorlab(&["freemotion", "--phase", "t", "--tmax", "20", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x0,x1,x2,x3,k0,k1,k2,k3,residual,PP,WW"));
    assert_eq!(lines.count(), 401);
    for r in reports(&out) {
        assert_eq!(r["status"], "pass");
    }
}

#[test]
fn freemotion_several_phases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = rotorlab(&[
        "freemotion",
        "--phase",
        "t",
        "--phase",
        "t + 0.1*(t - sin(t))",
        "--tmax",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("t.1.csv").exists());
    let rs = reports(&out);
    assert!(rs[2]["details"]["divergence"].as_f64().unwrap() > 0.05);
}

#[test]
fn freemotion_rejects_fast_phase() {
    let out = rotorlab(&["freemotion", "--phase", "2.5*t"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2/ℓ"));
}

#[test]
fn simulate_conserves_and_rotator_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let out = rotorlab(&["simulate", "--f", "Q", "--periods", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().lines().count() > 100);
    let bad = rotorlab(&["simulate", "--f", "rotator"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("singular Hessian"));
}

#[test]
fn verify_count_invariants() {
    let out = rotorlab(&["verify", "--suite", "count-invariants"]);
    assert!(out.status.success());
    let d = &reports(&out)[0]["details"];
    assert_eq!((d["rank"].as_u64(), d["nullity"].as_u64()), (Some(5), Some(10)));
    assert_eq!((d["zero_combinations"].as_u64(), d["functional_rank"].as_u64()), (Some(2), Some(3)));
    assert!(rotorlab(&["count-invariants", "--seed", "99"]).status.success());
}

#[test]
fn verify_tetrad_and_unknown_suite() {
    assert!(rotorlab(&["verify", "--suite", "tetrad", "--seed", "7"]).status.success());
    let out = rotorlab(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite `nope`"));
}

#[test]
fn reports_are_reproducible() {
    let a = rotorlab(&["verify", "--suite", "invariants", "--seed", "5"]);
    let b = rotorlab(&["verify", "--suite", "invariants", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tight\nseed = 21\ntol.tetrad.relations = 0\n").unwrap();
    let c = cfg.to_str().unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_rotorlab"))
        .args(["verify", "--suite", "tetrad"])
        .env("ROTORLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(reports(&out)[0]["seed"], 11);

    let out = Command::new(env!("CARGO_BIN_EXE_rotorlab"))
        .args(["verify", "--suite", "tetrad", "--config", c])
        .env("ROTORLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(reports(&out)[0]["seed"], 21);

    let out = rotorlab(&["verify", "--suite", "tetrad", "--config", c, "--seed", "3", "--tol", "tetrad.relations=1e-12"]);
    assert!(out.status.success());
    assert_eq!(reports(&out)[0]["seed"], 3);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let out = rotorlab(&["verify", "--suite", "tetrad", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown configuration key"));
    assert_eq!(rotorlab(&["verify", "--mass", "-1"]).status.code(), Some(2));
}

#[test]
fn report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = rotorlab(&["casimir", "--f", "rotator", "--Q", "2", "--report", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v[0]["name"], "casimir.rotator_f");
}
