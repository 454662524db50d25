use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn covpovm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covpovm"))
        .args(args)
        .current_dir(dir)
        .env_remove("COVPOVM_TOL")
        .output()
        .expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn with_fixture(name: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    let o = covpovm(&["fixture", name, "--dir", "."], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn write(dir: &Path, file: &str, v: &Value) {
    std::fs::write(dir.join(file), serde_json::to_string(v).unwrap()).unwrap();
}

#[test]
fn extremal_on_z2_c0() {
    let dir = with_fixture("z2-std");
    let o = covpovm(&["extremal", "--system", "system.json", "--kernel", "kernel-c0.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["extremal"], json!(false));
    assert_eq!(v["rank"], json!(2));
    assert_eq!(v["dim_T_tilde_U"], json!(2));
    assert_eq!(v["dim_commutant"], json!(4));
    assert!(v["witness"].is_array());

    let o = covpovm(&["extremal", "--kernel", "kernel-c1.json"], dir.path());
    assert_eq!(json_out(&o)["extremal"], json!(true));
}

#[test]
fn pvm_round_trip_through_files() {
    let dir = with_fixture("z2-std");
    let o = covpovm(&["to-povm", "--kernel", "kernel-c1.json", "--out", "p.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = covpovm(&["povm-check", "--povm", "p.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["passed"], json!(true));
    assert_eq!(v["is_projective"], json!(true));

    let o = covpovm(&["from-povm", "--povm", "p.json"], dir.path());
    let k = json_out(&o);
    assert_eq!(k["blocks"]["chi0,chi1"], json!([[[1.0, 0.0]]]));
}

#[test]
fn rank1_with_excess_multiplicity() {
    let dir = with_fixture("z2-m2");
    let o = covpovm(&["rank1", "--system", "system.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["certificates"], json!([]));
    assert_eq!(v["reason"], json!("multiplicity exceeds dimension"));

    let dir = with_fixture("z2-std");
    let o = covpovm(&["rank1", "--system", "system.json", "--build"], dir.path());
    let v = json_out(&o);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 1);
    assert_eq!(v["kernels"][0]["blocks"]["chi0,chi1"], json!([[[1.0, 0.0]]]));
}

#[test]
fn invalid_kernel_exits_2_with_report() {
    let dir = with_fixture("z2-std");
    let doubled = json!({
        "format": 1,
        "system": "system.json",
        "blocks": {"chi0,chi0": [[[2.0, 0.0]]], "chi1,chi1": [[[1.0, 0.0]]]}
    });
    write(dir.path(), "bad.json", &doubled);
    let o = covpovm(&["kernel-check", "--kernel", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let v = json_out(&o);
    assert_eq!(v["passed"], json!(false));
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == json!(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"trace_normalized"));

    let o = covpovm(&["--out", "r.json", "to-povm", "--kernel", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn malformed_input_exits_1() {
    let dir = with_fixture("z2-std");
    write(dir.path(), "broken.json", &json!({"format": 1, "blocks": {"chi0,chi0": [[[1.0]]]}}));
    let o = covpovm(&["kernel-check", "--kernel", "broken.json", "--system", "system.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/blocks/chi0,chi0/0/0"));

    let o = covpovm(&["kernel-check", "--kernel", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = covpovm(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = covpovm(&["fixture", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    // randomized commands refuse to run without a seed
    let o = covpovm(&["kernel-random", "--system", "system.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn random_kernels_are_deterministic() {
    let dir = with_fixture("z3-std");
    let run = |seed: &str| {
        covpovm(&["kernel-random", "--system", "system.json", "--seed", seed, "--aux", "2"], dir.path()).stdout
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
    std::fs::write(dir.path().join("k.json"), run("7")).unwrap();
    let o = covpovm(&["kernel-check", "--kernel", "k.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn decompose_mixes_back() {
    let dir = with_fixture("z3-std");
    let o = covpovm(&["decompose", "--kernel", "kernel-rank2.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    write(dir.path(), "plus.json", &v["plus"]);
    write(dir.path(), "minus.json", &v["minus"]);
    for f in ["plus.json", "minus.json"] {
        assert_eq!(covpovm(&["kernel-check", "--kernel", f], dir.path()).status.code(), Some(0));
    }
    let entry = |k: &Value, key: &str| -> (f64, f64) {
        let z = &k["blocks"][key][0][0];
        (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
    };
    let k: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel-rank2.json")).unwrap()).unwrap();
    for key in ["chi0,chi1", "chi0,chi2", "chi1,chi2"] {
        let (a, b, c) = (entry(&v["plus"], key), entry(&v["minus"], key), entry(&k, key));
        assert!(((a.0 + b.0) / 2.0 - c.0).abs() < 1e-10 && ((a.1 + b.1) / 2.0 - c.1).abs() < 1e-10);
    }

    let o = covpovm(&["decompose", "--kernel", "kernel-phase.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = covpovm(&["decompose", "--kernel", "kernel-identity.json", "--iterate", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["experimental"], json!(true));
    assert!(!v["steps"].as_array().unwrap().is_empty());
}

#[test]
fn davies_and_probabilities() {
    let dir = with_fixture("z2-std");
    let ones = json!({
        "format": 1,
        "system": "system.json",
        "blocks": {"chi0,chi0": [[[1.0, 0.0]]], "chi0,chi1": [[[1.0, 0.0]]], "chi1,chi0": [[[1.0, 0.0]]], "chi1,chi1": [[[1.0, 0.0]]]}
    });
    write(dir.path(), "c.json", &ones);
    let o = covpovm(&["davies", "--seed-op", "c.json", "--out", "d.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = covpovm(&["povm-check", "--povm", "d.json"], dir.path());
    assert_eq!(json_out(&o)["is_projective"], json!(true));

    let twice = json!({"format": 1, "system": "system.json", "blocks": {"chi0,chi0": [[[2.0, 0.0]]], "chi1,chi1": [[[2.0, 0.0]]]}});
    write(dir.path(), "c2.json", &twice);
    let o = covpovm(&["davies", "--seed-op", "c2.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(json_out(&o)["defect"].is_array());

    let o = covpovm(&["davies", "--seed", "3", "--system", "system.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));

    let s = 0.5;
    write(dir.path(), "plus.json", &json!({"format": 1, "matrix": [[[s, 0.0], [s, 0.0]], [[s, 0.0], [s, 0.0]]]}));
    let o = covpovm(&["prob", "--povm", "povm-c05.json", "--state", "plus.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["probabilities"], json!([0.75, 0.25]));
    write(
        dir.path(),
        "notstate.json",
        &json!({"format": 1, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}),
    );
    let o = covpovm(&["prob", "--povm", "povm-c05.json", "--state", "notstate.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_and_tolerance_env() {
    let dir = with_fixture("z4-h2");
    let o = covpovm(
        &["validate", "--group", "group.json", "--irreps", "irreps.json", "--system", "system.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["group"]["num_cosets"], json!(2));
    assert_eq!(v["irreps"]["complete"], json!(true));

    write(dir.path(), "g.json", &json!({"format": 1, "order": 2, "mult": [[0, 1], [1, 1]], "subgroup": [0]}));
    let o = covpovm(&["validate", "--group", "g.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_out(&o)["passed"], json!(false));

    let o = Command::new(env!("CARGO_BIN_EXE_covpovm"))
        .args(["extremal", "--kernel", "kernel-reference.json"])
        .current_dir(dir.path())
        .env("COVPOVM_TOL", "bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_covpovm"))
        .args(["extremal", "--kernel", "kernel-reference.json"])
        .current_dir(dir.path())
        .env("COVPOVM_TOL", "unitary=1e-8,rank=1e-9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fixtures_reemit_identically() {
    for name in ["z2-std", "z3-std", "z4-h2", "z2-m2"] {
        let a = with_fixture(name);
        let b = with_fixture(name);
        let mut files: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        for f in files {
            let x = std::fs::read(a.path().join(&f)).unwrap();
            let y = std::fs::read(b.path().join(&f)).unwrap();
            assert_eq!(x, y, "{name}/{f:?}");
        }
        // reload and re-emit through the CLI
        let k = a.path().join(if name == "z4-h2" {
            "kernel-reference.json"
        } else if name == "z2-std" {
            "kernel-c05.json"
        } else {
            "kernel-identity.json"
        });
        let o = covpovm(&["to-povm", "--kernel", k.to_str().unwrap()], a.path());
        assert_eq!(o.status.code(), Some(0));
    }
}
