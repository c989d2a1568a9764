use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kcenter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcenter"))
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
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    assert!(kcenter(&all).status.success());
    path
}

#[test]
fn version_lists_formats() {
    let out = kcenter(&["--version"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("report format 1"));
    assert!(text.contains("gadget sidecar format 1"));
}

#[test]
fn gen_cycle_and_determinism() {
    let out = kcenter(&["gen", "cycle", "--n", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("12 12 0"));

    let a = kcenter(&["gen", "gnp", "--n", "10", "--p", "0.4", "--seed", "7"]);
    let b = kcenter(&["gen", "gnp", "--n", "10", "--p", "0.4", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn path_has_diameter_four() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "p.txt", &["path", "--n", "5"]);
    // one center on P5: radius 2; the diameter is twice that
    let v = json(&kcenter(&["congest-run", "--graph", &g, "--k", "1"]));
    assert_eq!(v["diameter"], 4);
    assert_eq!(v["opt"], 2);
}

#[test]
fn congest_run_reports_bound() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(
        dir.path(),
        "g.txt",
        &["gnp", "--n", "10", "--p", "0.4", "--seed", "7"],
    );
    let trace = dir.path().join("t.jsonl");
    let v = json(&kcenter(&[
        "congest-run",
        "--graph",
        &g,
        "--k",
        "3",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert_eq!(v["kD_bound_ok"], true);
    assert!(v["ratio"].as_f64().unwrap() <= 2.0);
    assert_eq!(v["centers"].as_array().unwrap().len(), 3);
    let lines = fs::read_to_string(trace).unwrap();
    assert_eq!(lines.lines().count() as u64, v["rounds"].as_u64().unwrap());
}

#[test]
fn congest_rejects_weighted_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(
        dir.path(),
        "w.txt",
        &["weighted-gnp", "--n", "8", "--p", "0.5"],
    );
    let out = kcenter(&["congest-run", "--graph", &g, "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn clique_run_phases() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(
        dir.path(),
        "w.txt",
        &["weighted-gnp", "--n", "9", "--p", "0.4", "--seed", "3"],
    );
    let v = json(&kcenter(&["clique-run", "--graph", &g, "--k", "3"]));
    assert_eq!(v["phase2_rounds"], 2);
    assert!(v["ratio_vs_oracle"].as_f64().unwrap() <= 2.0);

    let v = json(&kcenter(&[
        "clique-run",
        "--graph",
        &g,
        "--k",
        "3",
        "--phase1",
        "inject:1.5:4",
        "--elect",
    ]));
    assert_eq!(v["phase2_rounds"], 2);
    assert!(v["ratio_vs_oracle"].as_f64().unwrap() <= 3.0);

    let out = kcenter(&["clique-run", "--graph", &g, "--k", "3", "--phase1", "bogus"]);
    assert!(!out.status.success());
}

#[test]
fn local_run_on_cycle() {
    let v = json(&kcenter(&[
        "local-run",
        "--n",
        "30",
        "--k",
        "2",
        "--eps",
        "1",
    ]));
    assert_eq!(v["t"], "6");
    assert_eq!(v["aggregated"], false);
    assert_eq!(v["opt"], 7);
    assert_eq!(v["bound_ok"], true);

    let v = json(&kcenter(&[
        "local-run",
        "--n",
        "8",
        "--k",
        "2",
        "--eps",
        "1/2",
    ]));
    assert_eq!(v["aggregated"], true);
}

#[test]
fn local_adversary_report() {
    let v = json(&kcenter(&[
        "local-adversary",
        "--alg",
        "spaced",
        "--n",
        "40",
        "--k",
        "2",
        "--t",
        "2",
    ]));
    assert_eq!(v["views_identical"], true);
    assert_eq!(v["holds"], true);
    assert_eq!(v["rearranged"].as_array().unwrap().len(), 40);
}

#[test]
fn gadget_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let o = kcenter(&[
        "gadget",
        "build",
        "--ell",
        "4",
        "--x",
        "0110",
        "--y",
        "1001",
        "--copies",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.txt.json")).unwrap()).unwrap();
    assert_eq!(side["disjoint"], true);
    assert_eq!(side["copies"], 2);
    let text = fs::read_to_string(&out).unwrap();
    let n: usize = text.split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(side["nodes"].as_array().unwrap().len(), n);

    let v = json(&kcenter(&[
        "gadget", "verify", "--ell", "4", "--x", "0110", "--y", "0100",
    ]));
    assert_eq!(v["optimum"]["opt1"], 3);
    assert_eq!(v["holds"], true);

    let v = json(&kcenter(&[
        "gadget",
        "verify",
        "--ell",
        "2",
        "--exhaustive",
    ]));
    assert_eq!(v["passed"], 16);

    let o = kcenter(&["gadget", "verify", "--ell", "4", "--x", "011", "--y", "010"]);
    assert!(!o.status.success());
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"seed": 1, "runs": [
            {"gen": {"kind": "gnp", "n": 10, "p": 0.4}, "k": 3, "algo": "congest", "repeat": 5},
            {"gen": {"kind": "weighted-gnp", "n": 8, "p": 0.4, "max_weight": 5}, "k": 2,
             "algo": "clique", "repeat": 5, "params": {"phase1": "inject:1.5"}}
        ]}"#,
    )
    .unwrap();
    let (csv, js) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    let run = || {
        kcenter(&[
            "bench",
            cfg.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--json",
            js.to_str().unwrap(),
            "--threads",
            "2",
        ])
    };
    assert!(run().status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 10);
    assert!(report["summary"]["clique"]["max_ratio"].as_f64().unwrap() <= 3.0);
    let csv_text = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 12);

    // wallclock is the last column and the only volatile one
    let stable = || {
        fs::read_to_string(&csv)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_owned())
            .collect::<Vec<_>>()
    };
    let first = stable();
    assert!(run().status.success());
    assert_eq!(first, stable());
}

#[test]
fn empty_bench_config_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 0, "runs": []}"#).unwrap();
    let v = json(&kcenter(&["bench", cfg.to_str().unwrap()]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn bench_fails_on_bad_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"seed": 0, "runs": [{"gen": {"kind": "cycle", "n": 12}, "k": 2, "algo": "congest", "model": "LOCAL"}]}"#,
    )
    .unwrap();
    let out = kcenter(&["bench", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
