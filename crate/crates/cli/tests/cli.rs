use std::process::{Command, Output};

use serde_json::Value;

fn heisrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heisrep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn standard_writes_a_module_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = heisrep(&["standard", "3^2:1+3^1:1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(m["orders"], serde_json::json!([9, 9, 3, 3]));

    let info = json(&heisrep(&["info", path.to_str().unwrap()]));
    assert_eq!(info["order"], 729);
    assert_eq!(info["n"], 9);
    assert_eq!(info["valid"], true);
}

#[test]
fn even_order_is_rejected() {
    let out = heisrep(&["standard", "2^1:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
}

#[test]
fn malformed_spec_is_a_usage_error() {
    assert_eq!(heisrep(&["standard", "3^x:1"]).status.code(), Some(2));
    assert_eq!(
        heisrep(&["info", "/nonexistent/file"]).status.code(),
        Some(2)
    );
    assert_eq!(heisrep(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn info_on_the_plane() {
    let info = json(&heisrep(&["info", "3^1:1"]));
    assert_eq!(info["n"], 3);
    assert_eq!(info["order"], 9);
    assert_eq!(info["valid"], true);
}

#[test]
fn info_splits_composite_modules() {
    let info = json(&heisrep(&["info", "15:1"]));
    assert_eq!(info["n"], 15);
    let primes: Vec<u64> = info["primary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["prime"].as_u64().unwrap())
        .collect();
    assert_eq!(primes, vec![3, 5]);
    assert_eq!(info["primary"][0]["order"], 9);
    assert_eq!(info["primary"][1]["order"], 25);
}

#[test]
fn lagrangian_count_in_rank_four() {
    let out = json(&heisrep(&["lagrangians", "3^1:2"]));
    // (3 + 1)(9 + 1)
    assert_eq!(out["count"], 40);
    assert_eq!(out["lagrangians"].as_array().unwrap().len(), 40);
}

#[test]
fn lagrangian_budget_is_enforced() {
    let out = heisrep(&["lagrangians", "3^1:2", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--budget"));
}

#[test]
fn reduce_z27_squared() {
    let out = json(&heisrep(&["reduce", "3^3:1"]));
    let gens = out["S"]["gens"].as_array().unwrap();
    assert_eq!(
        gens,
        &vec![serde_json::json!([9, 0]), serde_json::json!([0, 9])]
    );
    assert_eq!(out["Mc"]["orders"], serde_json::json!([3, 3]));
    assert_eq!(out["exponent_chain"], serde_json::json!([3, 1]));
}

#[test]
fn reduce_rejects_composite_modules() {
    assert_eq!(heisrep(&["reduce", "15:1"]).status.code(), Some(2));
}

#[test]
fn corrupted_gram_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"orders":[3,3],"gram":[[0,1],[1,0]]}"#).unwrap();
    let out = heisrep(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not alternating"));

    std::fs::write(&path, r#"{"orders":[3,3],"gram":[[0,0],[0,0]]}"#).unwrap();
    let out = heisrep(&["info", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn system_honors_the_basepoint() {
    let a = json(&heisrep(&["system", "3^1:1", "--base", "0"]));
    let b = json(&heisrep(&["system", "3^1:1", "--base", "3"]));
    assert_eq!(a["basepoint"]["eps"], 1);
    assert_eq!(b["basepoint"]["eps"], -1);
    assert_ne!(a["basepoint"], b["basepoint"]);
    assert_eq!(
        heisrep(&["system", "3^1:1", "--base", "8"]).status.code(),
        Some(2)
    );
}

#[test]
fn pi_export_has_the_right_dimension() {
    let out = json(&heisrep(&["pi", "5^1:1"]));
    assert_eq!(out["dim"], 5);
    assert_eq!(out["center"], 5);
    assert_eq!(out["field"]["character_descends"], true);
}

#[test]
fn gauss_sum_on_z5() {
    let out = json(&heisrep(&["gauss", r#"{"orders":[5],"form":[[1]]}"#]));
    assert_eq!(out["holds"], true);
    assert_eq!(out["order_squared"], 25);
    let bad = heisrep(&["gauss", r#"{"orders":[3,3],"form":[[1,0],[0,0]]}"#]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "4")] {
        let out = Command::new(env!("CARGO_BIN_EXE_heisrep"))
            .args(["verify", "3^2:1+3^1:1", "--level", "quick", "--seed", "42"])
            .args(["--out", path.to_str().unwrap()])
            .env("HEISREP_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let report: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 42);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_heisrep"))
        .args(["info", "3^1:1"])
        .env("HEISREP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exports_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = heisrep(&["standard", "5^1:1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read(&path).unwrap();
    let again = heisrep(&["info", path.to_str().unwrap()]);
    let direct = heisrep(&["info", "5^1:1"]);
    assert_eq!(json(&again), json(&direct));
    let m: heisrep::symplectic::SympMod = serde_json::from_slice(&first).unwrap();
    let reparsed: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(serde_json::to_value(&m).unwrap(), reparsed);
    assert_eq!(m, heisrep::symplectic::standard_module(&[(5, 1)]).unwrap());
}
