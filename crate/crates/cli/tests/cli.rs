use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn torusflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torusflow")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn pentagon(p: [f64; 5], gamma: f64) -> Value {
    serde_json::json!({
        "graph": {"n": 5, "edges": [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 1.0], [3, 4, 1.0], [4, 0, 1.0]]},
        "flow": {"family": "sin"},
        "p": p,
        "gamma": gamma,
    })
}

#[test]
fn solve_pentagon_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pentagon.json", &pentagon([0.0; 5], 1.4));
    let out = torusflow(&["solve", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let us: Vec<i64> = report["solutions"].as_array().unwrap().iter().map(|s| s["u"][0].as_i64().unwrap()).collect();
    assert_eq!(us, [-1, 0, 1]);
    assert_eq!(report["basis"]["kind"], "fundamental");
}

#[test]
fn infeasible_pentagon_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "hot.json", &pentagon([0.5, -0.5, 0.0, 0.0, 0.0], 0.1));
    let out = torusflow(&["solve", input.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["solutions"].as_array().unwrap().len(), 0);
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = torusflow(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(code(&torusflow(&["solve", "/nonexistent/problem.json"])), 1);
    assert_eq!(code(&torusflow(&["solve", "--case", "no-such-case"])), 1);
    assert_eq!(code(&torusflow(&["solve", "--case", "pentagon", "--gamma", "4"])), 1);
    assert_eq!(code(&torusflow(&["solve", "--case", "pentagon", "--jobs", "0"])), 1);
    assert_eq!(code(&torusflow(&["solve", "--case", "rts24-mod"])), 1);
    assert_eq!(code(&torusflow(&["frobnicate"])), 1);
}

#[test]
fn windings_listing() {
    let out = torusflow(&["windings", "--case", "ring12-asym"]);
    assert_eq!(code(&out), 0);
    let w = json(&out);
    assert_eq!(w["bounds"], serde_json::json!([2]));
    assert_eq!(w["candidates"], 5);
    assert_eq!(w["cycle_lengths"], serde_json::json!([12]));

    let expo = json(&torusflow(&["windings", "--case", "expo(3)"]));
    assert_eq!(expo["candidates"], 27);

    let dir = tempfile::tempdir().unwrap();
    let tree = serde_json::json!({
        "graph": {"n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]]},
        "flow": {"family": "sin"}, "p": [0.1, 0.0, -0.1], "gamma": 1.0,
    });
    let path = write(dir.path(), "tree.json", &tree);
    let out = torusflow(&["windings", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("acyclic: unique-solution regime"));
    assert_eq!(json(&out)["candidates"], 1);
}

fn ptc_column(csv_text: &str) -> Vec<(i64, f64)> {
    csv_text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[1] == "ptc").then(|| (cols[0].parse().unwrap(), cols[2].parse().unwrap()))
        })
        .collect()
}

#[test]
fn sweep_examples() {
    let sym = ptc_column(&String::from_utf8(torusflow(&["sweep", "--case", "ring12-sym"]).stdout).unwrap());
    assert_eq!(sym.len(), 5);
    for k in 0..5 {
        assert_eq!(sym[k].0, -sym[4 - k].0);
        assert!((sym[k].1 - sym[4 - k].1).abs() < 1e-5, "{sym:?}");
    }
    let asym = ptc_column(&String::from_utf8(torusflow(&["sweep", "--case", "ring12-asym"]).stdout).unwrap());
    let best = asym.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(best.0, -1, "{asym:?}");
    let flat = ptc_column(&String::from_utf8(torusflow(&["sweep", "--case", "ring12-asym", "--gamma", "0"]).stdout).unwrap());
    assert_eq!(flat.iter().map(|r| r.0).collect::<Vec<_>>(), [0]);
}

#[test]
fn check_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = torusflow(&["solve", "--case", "pentagon", "--out", report_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let ok = torusflow(&["check", report_path.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["certified"], true);

    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();

    let mut perturbed = report.clone();
    let f0 = perturbed["solutions"][1]["f"][0].as_f64().unwrap();
    perturbed["solutions"][1]["f"][0] = (f0 + 1e-3).into();
    let path = write(dir.path(), "perturbed.json", &perturbed);
    let out = torusflow(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    let failures = json(&out)["solutions"][1]["failures"].to_string();
    assert!(failures.contains("balance residual"), "{failures}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("balance residual"));

    let mut wrong_u = report.clone();
    wrong_u["solutions"][0]["u"][0] = 1.into();
    let path = write(dir.path(), "wrong_u.json", &wrong_u);
    let out = torusflow(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(json(&out)["solutions"][0]["failures"].to_string().contains("winding vector mismatch"));

    let solutions = write(dir.path(), "solutions.json", &report["solutions"]);
    let with_case = torusflow(&["check", solutions.to_str().unwrap(), "--case", "pentagon"]);
    assert_eq!(code(&with_case), 0);
    assert_eq!(code(&torusflow(&["check", solutions.to_str().unwrap()])), 1);
}

#[test]
fn csv_and_basis_outputs() {
    let out = torusflow(&["solve", "--case", "pentagon", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("u_0,f_0"));
    assert_eq!(text.lines().count(), 4);

    let basis = json(&torusflow(&["basis", "--case", "expo(2)", "--basis", "minimum"]));
    assert_eq!(basis["kind"], "minimum");
    assert_eq!(basis["lengths"], serde_json::json!([5, 5]));
}

#[test]
fn decompose_splits_flows() {
    let out = torusflow(&["decompose", "--case", "pentagon"]);
    assert_eq!(code(&out), 0);
    for item in json(&out).as_array().unwrap() {
        let f: Vec<f64> = serde_json::from_value(item["f"].clone()).unwrap();
        let cut: Vec<f64> = serde_json::from_value(item["cutset"].clone()).unwrap();
        let cyc: Vec<f64> = serde_json::from_value(item["cycle"].clone()).unwrap();
        for e in 0..5 {
            assert!((f[e] - cut[e] - cyc[e]).abs() < 1e-12);
            assert!(cut[e].abs() < 1e-12);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let flow = write(dir.path(), "flow.json", &serde_json::json!([1.0, 1.0, 1.0, 1.0, 1.0]));
    let out = torusflow(&["decompose", "--case", "pentagon", "--flow", flow.to_str().unwrap()]);
    assert_eq!(json(&out)[0]["loop_flows"].as_array().unwrap().len(), 1);
}

#[test]
fn gen_is_seeded() {
    let a = torusflow(&["gen", "--seed", "11", "--nodes", "7", "--weighted"]);
    let b = torusflow(&["gen", "--seed", "11", "--nodes", "7", "--weighted"]);
    let c = torusflow(&["gen", "--seed", "12", "--nodes", "7", "--weighted"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.json");
    torusflow(&["gen", "--seed", "3", "--nodes", "6", "--out", path.to_str().unwrap()]);
    let out = torusflow(&["solve", path.to_str().unwrap()]);
    assert!(matches!(code(&out), 0 | 3));

    let case = dir.path().join("ring.json");
    torusflow(&["gen", "--case", "ring12-sym", "--out", case.to_str().unwrap()]);
    let from_file = torusflow(&["solve", "--case", case.to_str().unwrap()]);
    let builtin = torusflow(&["solve", "--case", "ring12-sym"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, builtin.stdout);
}

#[test]
fn elastic_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "graph": {"n": 5, "edges": [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 1.0], [3, 4, 1.0], [4, 0, 1.0]]},
        "energy": {"family": "spacing"}, "tau": [0.0, 0.0, 0.0, 0.0, 0.0], "gamma": 1.4,
    });
    let path = write(dir.path(), "elastic.json", &spec);
    let out = torusflow(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["solutions"].as_array().unwrap().len(), 3);
}
