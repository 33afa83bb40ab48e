use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn linematch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linematch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_run_reports_costs_for_every_k() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.json");
    let out = linematch(&["gen", "--family", "random", "--n", "6", "--seed", "9", "--out", path(&file)]);
    assert!(out.status.success());
    let v = json_of(&linematch(&["run", "--instance", path(&file)]));
    let m = v["matching"].as_array().unwrap();
    let mut ids: Vec<u64> = m.iter().map(|x| x.as_u64().unwrap()).collect();
    ids.sort_unstable();
    assert_eq!(ids, vec![1, 2, 3, 4, 5, 6]);
    assert_eq!(v["cost_per_k"].as_object().unwrap().len(), 6);

    let one = json_of(&linematch(&["run", "--instance", path(&file), "--k", "2"]));
    assert_eq!(one["cost_per_k"]["2"], v["cost_per_k"]["2"]);
    assert_eq!(one["cost_per_k"].as_object().unwrap().len(), 1);
}

#[test]
fn run_on_a_bare_profile_has_no_costs() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, r#"{"rankings": [[1, 2, 3], [2, 1, 3], [3, 2, 1]]}"#).unwrap();
    let v = json_of(&linematch(&["run", "--profile", path(&file)]));
    assert_eq!(v["matching"], serde_json::json!([1, 2, 3]));
    assert!(v["cost_per_k"].is_null());
}

#[test]
fn naive_anchors_reproduce_the_pathology() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.json");
    let out = linematch(&["gen", "--family", "tiebreak-k1", "--n", "6", "--eps", "1/1000", "--out", path(&file)]);
    assert!(out.status.success());
    // a_2 and a_{n-1}
    let naive = json_of(&linematch(&[
        "run", "--instance", path(&file), "--algo", "ordermatch-naive", "--anchors", "2,5", "--k", "1",
    ]));
    let good = json_of(&linematch(&["run", "--instance", path(&file), "--k", "1"]));
    // the optimum is 1 here, so these are the ratios
    assert_eq!(naive["cost_per_k"]["1"], "999/200");
    let good = good["cost_per_k"]["1"].as_str().unwrap();
    let (num, den) = good.split_once('/').unwrap_or((good, "1"));
    assert!(num.parse::<u64>().unwrap() <= 3 * den.parse::<u64>().unwrap(), "{good}");
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.json");
    linematch(&["gen", "--family", "tiebreak-kgeq2", "--n", "4", "--out", path(&file)]);
    let out = linematch(&["run", "--instance", path(&file), "--algo", "ordermatch-naive"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--anchors"));
    let out = linematch(&["run", "--instance", path(&file), "--k", "9"]);
    assert!(!out.status.success());
    let missing = dir.path().join("nope.json");
    let out = linematch(&["run", "--instance", path(&missing)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
}

#[test]
fn analyze_emits_edges_trace_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("i.json");
    std::fs::write(&file, r#"{"agents": ["0", "1", "5", "9"], "items": ["2", "0", "6", "10"]}"#).unwrap();
    let v = json_of(&linematch(&["analyze", "--instance", path(&file)]));
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
    assert!(v["dot"].as_str().unwrap().starts_with("digraph"));
    assert_eq!(v["pi_g_ok"], true);
    assert!(v["removal"]["swaps"].is_array());
    assert_eq!(v["removal"]["monotone"], true);
    assert_eq!(v["removal"]["edge_bound_violations"], serde_json::json!([]));
}

#[test]
fn twosided_modes_agree_and_count_queries() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ts.json");
    let out = linematch(&["gen", "--family", "random", "--two-sided", "--n", "7", "--seed", "4", "--out", path(&file)]);
    assert!(out.status.success());
    let mut matchings = Vec::new();
    for mode in ["optimal", "ranks1side", "zeroknowledge"] {
        let v = json_of(&linematch(&["twosided", "--mode", mode, "--instance", path(&file), "--seed", "11"]));
        assert_eq!(v["optimal"], true, "{mode}");
        assert_eq!(v["within_bound"], true, "{mode}");
        if mode == "zeroknowledge" {
            assert!(v["rank_queries"].as_u64().unwrap() <= 31);
        }
        matchings.push(v["matching"].clone());
    }
    assert!(matchings.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn query_lb_writes_both_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("q.json");
    let out = linematch(&["gen", "--family", "query-lb", "--n", "5", "--seed", "1", "--out", path(&file)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["queried"].as_array().unwrap().len(), 3);
    assert_ne!(v["first"], v["second"]);
}

#[test]
fn eval_writes_reports_and_exits_zero_when_clean() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let json = dir.path().join("rows.json");
    let config = dir.path().join("sweep.conf");
    std::fs::write(
        &config,
        format!(
            "# tiny sweep\nfamilies = random, lb-kgeq2\nsizes = 2..5\nalgorithms = ordermatch, optimal\nrepetitions = 4\nseed = 2\ncsv = {}\njson = {}\n",
            csv.display(),
            json.display()
        ),
    )
    .unwrap();
    let out = linematch(&["eval", "--config", path(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("instance_id,family,n,seed,algorithm,k,"));
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), text.lines().count() - 1);

    std::fs::write(&config, "sizes = 2..oops\n").unwrap();
    let out = linematch(&["eval", "--config", path(&config)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
