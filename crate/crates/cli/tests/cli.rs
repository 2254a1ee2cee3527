use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clique-sim")).args(args).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn broadcast_cc_on_gnp_is_correct_and_quick() {
    let out = sim(&["run", "--algo", "broadcast-cc", "--gen", "gnp(256,0.02)", "--s", "4", "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &json_lines(&out)[0];
    assert_eq!(rec["correct"], true);
    assert!(rec["phases"].as_u64().unwrap() <= 5);
    assert_eq!(rec["max_range"], 1);
}

#[test]
fn cc_logstar_sweep_over_seeds() {
    let out =
        sim(&["run", "--algo", "cc-logstar", "--gen", "gnp(256,1.5/n)", "--seeds", "0..100", "--format", "json-lines"]);
    let recs = json_lines(&out);
    assert_eq!(recs.len(), 100);
    let ok = recs.iter().filter(|r| r["correct"] == true).count();
    assert!(ok >= 99, "{ok}");
    assert!(recs.iter().all(|r| r["max_range"].as_u64().unwrap() <= 2));
}

#[test]
fn capacity_optimal_msf_on_two_nodes() {
    let out = sim(&["run", "--algo", "msf-capopt", "--gen", "path(2)", "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &json_lines(&out)[0];
    assert_eq!(rec["correct"], true);
    assert!(rec["total_capacity"].as_u64().unwrap() <= 20);
}

#[test]
fn sweep_reports_capacity_per_log_n() {
    let out = sim(&[
        "sweep",
        "--algo",
        "msf-capopt",
        "--gen",
        "gnp(n,4/n)",
        "--log-n",
        "6..9",
        "--seeds",
        "0..2",
        "--format",
        "json-lines",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = json_lines(&out);
    let summary: Vec<&serde_json::Value> = recs.iter().filter_map(|r| r.get("summary")).collect();
    assert_eq!(recs.len(), 8 + 4);
    assert_eq!(summary.len(), 4);
    let ratios: Vec<f64> = summary.iter().map(|s| s["capacity_per_log_n"].as_f64().unwrap()).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo <= 3.0, "{ratios:?}");
}

#[test]
fn empty_sweep_is_an_empty_table() {
    let out = sim(&["sweep", "--algo", "cc-logstar", "--gen", "path(n)", "--log-n", "6..5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "sweep",
        "--algo",
        "cc-capopt",
        "--gen",
        "components(4,n,3/n)",
        "--n",
        "64,128",
        "--seeds",
        "3,4",
        "--format",
        "csv",
    ];
    let (a, b) = (sim(&args), sim(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_with_3() {
    assert_eq!(sim(&["run", "--algo", "nope", "--gen", "path(4)"]).status.code(), Some(3));
    assert_eq!(sim(&["run", "--algo", "cc-logstar"]).status.code(), Some(3));
    assert_eq!(sim(&["run", "--algo", "cc-logstar", "--gen", "cube(4)"]).status.code(), Some(3));
    assert_eq!(sim(&["run", "--algo", "broadcast-cc", "--gen", "path(4)", "--s", "1"]).status.code(), Some(3));
    assert_eq!(sim(&["--help"]).status.code(), Some(0));
}

#[test]
fn narrowed_range_is_a_model_violation() {
    let out = sim(&["run", "--algo", "msf-rcast2", "--gen", "gnp(64,0.1)", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning"), "{err}");
    assert!(err.contains("range is 1"), "{err}");
}

#[test]
fn graph_files_are_read() {
    let dir = std::env::temp_dir().join(format!("clique-sim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.txt");
    std::fs::write(&path, "5 4\n0 1 3\n1 2 9\n2 0 4\n3 4 1\n").unwrap();
    let out = sim(&["run", "--algo", "boruvka-msf", "--graph", path.to_str().unwrap(), "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = &json_lines(&out)[0];
    assert_eq!(rec["n"], 5);
    assert_eq!(rec["correct"], true);
    std::fs::write(&path, "3 1\n0 0 1\n").unwrap();
    assert_eq!(sim(&["run", "--algo", "boruvka-msf", "--graph", path.to_str().unwrap()]).status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn phase_logs_ride_along_in_json_lines() {
    let out = sim(&["run", "--algo", "msf-rcast2", "--gen", "gnp(128,0.05)", "--format", "json-lines", "--phase-log"]);
    let rec = &json_lines(&out)[0];
    let log = rec["phase_log"].as_array().unwrap();
    assert_eq!(log.len() as u64, rec["phases"].as_u64().unwrap());
    assert!(log[0].get("mu").is_some());
}
