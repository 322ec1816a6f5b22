use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rankguard(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankguard"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = rankguard(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// N = 4 codes designed at erasure probability 0.5: rate 1/4 keeps
/// coordinate 4, rate 3/4 keeps {2,3,4}.
fn small_codes() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["construct", "--n", "2", "--rate", "0.25", "--delta", "0.5", "--out", "one.json"]);
    ok(dir.path(), &["construct", "--n", "2", "--rate", "0.75", "--delta", "0.5", "--out", "two.json"]);
    dir
}

#[test]
fn construct_picks_the_most_reliable_coordinates() {
    let dir = small_codes();
    let one = json(dir.path().join("one.json"));
    assert_eq!(one["info_set"], serde_json::json!([4]));
    assert_eq!(one["frozen_set"], serde_json::json!([1, 2, 3]));
    assert!(one["manifest_hash"].is_string());
    assert_eq!(json(dir.path().join("two.json"))["info_set"], serde_json::json!([2, 3, 4]));

    let sidecar = json(dir.path().join("one.json.manifest.json"));
    assert_eq!(sidecar["command"], "construct");
    assert_eq!(sidecar["outputs"], serde_json::json!(["one.json"]));
}

#[test]
fn construct_edge_designs() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["construct", "--n", "2", "--rate", "0", "--delta", "0.5", "--out", "empty.json"]);
    assert_eq!(json(d.join("empty.json"))["info_set"], serde_json::json!([]));
    ok(d, &["construct", "--n", "2", "--zeta", "0", "--delta", "0", "--out", "full.json"]);
    assert_eq!(json(d.join("full.json"))["info_set"], serde_json::json!([1, 2, 3, 4]));

    fs::write(d.join("delta.json"), "[0.5, 0.5, 0.5, 0.5]").unwrap();
    ok(d, &["construct", "--n", "2", "--rate", "0.25", "--delta", "@delta.json", "--out", "file.json"]);
    assert_eq!(json(d.join("file.json"))["info_set"], serde_json::json!([4]));
    let sidecar = json(d.join("file.json.manifest.json"));
    assert_eq!(sidecar["inputs"][0]["path"], "delta.json");
}

#[test]
fn construct_is_deterministic() {
    let (a, b) = (small_codes(), small_codes());
    for name in ["one.json", "one.json.manifest.json", "two.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = small_codes();
    let d = dir.path();
    for args in [
        &["construct", "--n", "2", "--rate", "1.5", "--delta", "0.5"][..],
        &["construct", "--n", "2", "--delta", "0.5"],
        &["construct", "--n", "2", "--rate", "0.5", "--delta", "abc"],
        &["certify", "--code", "one.json", "--public", "0"],
        &["certify", "--code", "one.json", "--public", "5"],
        &["certify", "--code", "missing.json", "--public", "1"],
        &["select", "--code", "one.json", "--k", "0"],
        &["select", "--code", "one.json", "--k", "2", "--method", "brute", "--cap", "2"],
        &["frobnicate"],
    ] {
        assert_eq!(rankguard(d, args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn certify_reports_leakage_and_equations() {
    let dir = small_codes();
    let d = dir.path();
    let out = ok(d, &["certify", "--code", "one.json", "--public", "4", "--out", "c1.json"]);
    assert!(out.lines().any(|l| l == "L = 1"), "{out}");
    assert!(out.contains("x_4 = u_4"), "{out}");

    let out = ok(d, &["certify", "--code", "one.json", "--public", "", "--out", "c0.json"]);
    assert!(out.lines().any(|l| l == "L = 0"), "{out}");

    let out = ok(d, &["certify", "--code", "two.json", "--public", "1,2,3", "--out", "c2.json"]);
    assert!(out.lines().any(|l| l == "L = 2"), "{out}");
    let equations: Vec<&str> = out.lines().filter(|l| l.contains(" = u_")).collect();
    assert_eq!(equations.len(), 2, "{out}");

    let cert = json(d.join("c2.json"));
    assert_eq!(cert["P"], serde_json::json!([1, 2, 3]));
    assert_eq!(cert["L"], 2);
    assert_eq!(cert["rank_GP"], 3);
    assert_eq!(cert["rank_GFP"], 1);
    assert_eq!(cert["R"].as_array().unwrap().len(), 3);
    assert_eq!(cert["verified"], true);
}

#[test]
fn certificate_artifact_is_stdout_without_out_flag() {
    let dir = small_codes();
    let out = ok(dir.path(), &["certify", "--code", "one.json", "--public", "1"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["L"], 0);
}

#[test]
fn verify_accepts_untampered_certificates() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["certify", "--code", "two.json", "--public", "1,2,3", "--out", "c2.json"]);
    let out = ok(d, &["verify", "--cert", "c2.json", "--code", "two.json"]);
    assert!(out.starts_with("ok"), "{out}");
}

fn tamper(d: &Path, edit: impl FnOnce(&mut Value)) -> Output {
    ok(d, &["certify", "--code", "two.json", "--public", "1,2,3", "--out", "c2.json"]);
    let mut cert = json(d.join("c2.json"));
    edit(&mut cert);
    fs::write(d.join("bad.json"), serde_json::to_string(&cert).unwrap()).unwrap();
    rankguard(d, &["verify", "--cert", "bad.json", "--code", "two.json"])
}

#[test]
fn verify_rejects_edited_leakage() {
    let dir = small_codes();
    let out = tamper(dir.path(), |c| c["L"] = serde_json::json!(3));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank identity mismatch"));
}

#[test]
fn verify_names_a_leaky_extractor() {
    let dir = small_codes();
    // Coordinate 1 carries u_1; routing it into R lets frozen bits through.
    let out = tamper(dir.path(), |c| c["R"] = serde_json::json!(["10", "00", "01"]));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frozen annihilation"), "{err}");
}

#[test]
fn verify_rejects_certificates_for_another_code() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["certify", "--code", "one.json", "--public", "1,2,3", "--out", "c1.json"]);
    let out = rankguard(d, &["verify", "--cert", "c1.json", "--code", "two.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("code id"));
}

#[test]
fn select_reports_the_documented_greedy_gap() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["select", "--code", "two.json", "--k", "1", "--method", "both", "--out", "sel.json"]);
    let sel = json(d.join("sel.json"));
    assert_eq!(sel["greedy"]["P"], serde_json::json!([4]));
    assert_eq!(sel["greedy"]["L"], 1);
    assert_eq!(sel["brute_force"]["P"], serde_json::json!([1]));
    assert_eq!(sel["brute_force"]["L"], 0);
    assert_eq!(sel["gap"], 1);

    ok(d, &["select", "--code", "one.json", "--k", "1", "--out", "g.json"]);
    let g = json(d.join("g.json"));
    assert_eq!(g["greedy"]["P"], serde_json::json!([1]));
    assert_eq!((g["greedy"]["L"].as_u64(), g["greedy"]["bound"].as_u64()), (Some(0), Some(1)));
    assert!(g.get("brute_force").is_none());
}

fn read_sweep(path: PathBuf) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn sweep_writes_the_comparison_table() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["construct", "--n", "3", "--rate", "0.5", "--delta", "0.5", "--out", "eight.json"]);
    ok(d, &["sweep", "--code", "eight.json", "--k", "8", "--out", "sweep.csv"]);
    let text = fs::read_to_string(d.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("k,L_greedy,bound,L_opt,gap,t_greedy_ms,t_bf_ms"));
    let rows = read_sweep(d.join("sweep.csv"));
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let v: Vec<usize> = (0..5).map(|i| r[i].parse().unwrap()).collect();
        assert!(v[3] <= v[1] && v[1] <= v[2], "{r:?}");
        assert_eq!(v[4], v[1] - v[3]);
    }
    assert!(d.join("sweep.csv.manifest.json").exists());

    ok(d, &["sweep", "--code", "two.json", "--k", "1", "--out", "two.csv"]);
    assert_eq!(&read_sweep(d.join("two.csv"))[0][4], "1");
    ok(d, &["sweep", "--code", "one.json", "--k", "1", "--out", "one.csv"]);
    assert_eq!(&read_sweep(d.join("one.csv"))[0][4], "0");
}

#[test]
fn extract_applies_the_extractor() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["certify", "--code", "one.json", "--public", "4", "--out", "c1.json"]);
    // x_4 = u_4 for every input.
    for (x, bit) in [("0001", "1"), ("1110", "0")] {
        ok(d, &["extract", "--cert", "c1.json", "--code", "one.json", "--codeword", x, "--out", "e.json"]);
        assert_eq!(json(d.join("e.json"))["recovered"], bit);
    }
    let short = rankguard(d, &["extract", "--cert", "c1.json", "--code", "one.json", "--codeword", "01"]);
    assert_eq!(short.status.code(), Some(2));
}

fn write_config(d: &Path, trials: u64, seed: u64) {
    fs::create_dir_all(d.join("cfg")).unwrap();
    let cfg = serde_json::json!({
        "code": "../two.json",
        "P": [1, 2, 3],
        "delta_pub": 0.3,
        "delta_priv": 0.1,
        "trials": trials,
        "seed": seed,
    });
    fs::write(d.join("cfg/exp.json"), cfg.to_string()).unwrap();
}

#[test]
fn simulate_is_reproducible_and_adversary_exact() {
    let dir = small_codes();
    let d = dir.path();
    write_config(d, 2000, 11);
    ok(d, &["simulate", "--config", "cfg/exp.json", "--out", "a.json"]);
    let a = json(d.join("a.json"));
    assert_eq!(a["trials"], 2000);
    assert_eq!(a["adversary_checks_passed"], 2000);
    assert_eq!(
        a["fer"].as_f64().unwrap(),
        a["frame_errors"].as_f64().unwrap() / 2000.0
    );

    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_rankguard"))
            .current_dir(d)
            .env("RANKGUARD_THREADS", threads)
            .args(["simulate", "--config", "cfg/exp.json"])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let single = run("1");
    assert_eq!(single, run("4"));
    assert_eq!(single, run("0"));
    let v: Value = serde_json::from_slice(&single).unwrap();
    assert_eq!(v["frame_errors"], a["frame_errors"]);
}

#[test]
fn simulate_without_erasures_never_fails() {
    let dir = small_codes();
    let d = dir.path();
    write_config(d, 500, 3);
    let mut cfg = json(d.join("cfg/exp.json"));
    cfg["delta_pub"] = serde_json::json!(0.0);
    cfg["delta_priv"] = serde_json::json!(0.0);
    fs::write(d.join("cfg/exp.json"), cfg.to_string()).unwrap();
    ok(d, &["simulate", "--config", "cfg/exp.json", "--seed", "99", "--out", "r.json"]);
    let r = json(d.join("r.json"));
    assert_eq!(r["fer"], 0.0);
    assert_eq!(r["seed"], 99);
}

#[test]
fn reused_masks_are_flagged() {
    let dir = small_codes();
    let d = dir.path();
    write_config(d, 10, 1);
    let mut cfg = json(d.join("cfg/exp.json"));
    cfg["reuse_mask"] = serde_json::json!(true);
    fs::write(d.join("cfg/exp.json"), cfg.to_string()).unwrap();
    let out = rankguard(d, &["simulate", "--config", "cfg/exp.json", "--out", "r.json"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative demonstration"));
    assert_eq!(json(d.join("r.json"))["reuse_mask"], true);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = small_codes();
    let out = Command::new(env!("CARGO_BIN_EXE_rankguard"))
        .current_dir(dir.path())
        .env("RANKGUARD_THREADS", "many")
        .args(["verify", "--cert", "x", "--code", "y"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn written_files_round_trip_through_commands() {
    let dir = small_codes();
    let d = dir.path();
    ok(d, &["certify", "--code", "two.json", "--public", "3,1", "--out", "c.json"]);
    let cert = json(d.join("c.json"));
    assert_eq!(cert["P"], serde_json::json!([1, 3]));
    // The manifest hash field is ignored on read.
    ok(d, &["verify", "--cert", "c.json", "--code", "two.json"]);
    let sidecar = json(d.join("c.json.manifest.json"));
    assert_eq!(sidecar["inputs"][0]["path"], "two.json");
    assert_eq!(sidecar["seed"], cert["seed"]);
}
