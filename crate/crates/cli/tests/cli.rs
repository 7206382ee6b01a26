use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bellscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellscope"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = bellscope(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn assert_schema(name: &str, instance: &Value) {
    let path = root().join(format!("docs/schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "one error line: {s}");
    s
}

#[test]
fn limits_match_table_values() {
    let v = json_ok(&["limits", "--n", "3", "--d", "4"]);
    assert_eq!(v["n1"], 10);
    assert_schema("limits", &v);
    assert_eq!(json_ok(&["limits", "--n", "4", "--d", "3"])["n1"], 9);
    let v = json_ok(&["limits", "--n", "2", "--d", "2"]);
    assert_eq!(v["n1"], 3);
    assert!((v["me"].as_f64().unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn limits_csv_has_header_and_one_row() {
    let out = bellscope(&["limits", "--n", "3", "--d", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].split(',').any(|h| h == "n1"));
}

#[test]
fn analyze_fig1_gives_eight_classes() {
    let v = json_ok(&["analyze", "--circuit", "circuits/fig1_4x2.circuit.json", "--states", "bell:4,2"]);
    assert_schema("partition", &v);
    assert_eq!(v["class_count"], 8);
    assert_eq!(v["singleton_count"], 0);
}

#[test]
fn analyze_fig3_both_models() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("coinc.csv");
    let v = json_ok(&[
        "analyze",
        "--circuit",
        "circuits/fig3_2x8.circuit.json",
        "--states",
        "hyper64",
        "--coincidence-csv",
        csv.to_str().unwrap(),
    ]);
    assert_schema("partition", &v);
    assert_eq!(v["class_count"], 15);
    let mut sizes: Vec<u64> = v["class_sizes"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [vec![4; 14], vec![8]].concat());
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "state");
    let col = header.iter().position(|h| h == "D_{1,9}").expect("relabeled pattern column");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 64);
    let phi1 = rows.iter().find(|r| &r[0] == "Phi_1").unwrap();
    assert!((phi1[col].parse::<f64>().unwrap() - 0.125).abs() < 1e-12);

    let v = json_ok(&[
        "analyze",
        "--circuit",
        "circuits/fig3_2x8.circuit.json",
        "--states",
        "hyper64",
        "--model",
        "threshold",
    ]);
    assert_eq!(v["certified_classes"], 14);
    let flagged = v["requires_number_resolving"].as_array().unwrap();
    assert_eq!(flagged.len(), 1);
    assert!(flagged[0].as_array().unwrap().iter().any(|l| l == "Phi_49"));
}

#[test]
fn analyze_text_table_marks_cells() {
    let out = bellscope(&[
        "analyze",
        "--circuit",
        "circuits/fig3_2x8.circuit.json",
        "--states",
        "hyper15",
        "--format",
        "text-table",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let phi1 = text.lines().find(|l| l.starts_with("Phi_1 ")).unwrap();
    assert_eq!(phi1.matches('#').count(), 8);
}

#[test]
fn malformed_circuit_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"schema_version\": 1,\n  \"mode_count\": \"four\"\n}\n").unwrap();
    let out = bellscope(&["analyze", "--circuit", p.to_str().unwrap(), "--states", "bell:2,2"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_line(&out);
    assert!(err.starts_with("error[E_PARSE]:"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn non_unitary_device_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nonunitary.json");
    let circuit = r#"{"schema_version":1,"mode_count":4,"photon_count":2,"statistics":"boson",
        "devices":[{"kind":"CustomUnitary","ports":[[0,1]],
        "params":{"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}}]}"#;
    std::fs::write(&p, circuit).unwrap();
    let out = bellscope(&["analyze", "--circuit", p.to_str().unwrap(), "--states", "bell:2,2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).starts_with("error[E_VALIDATION]:"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["limits", "--n", "1", "--d", "2"],
        vec!["limits", "--n", "2"],
        vec!["frobnicate"],
        vec!["reproduce", "fig2"],
    ] {
        let out = bellscope(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr_line(&out).starts_with("error[E_USAGE]:"));
    }
}

#[test]
fn missing_file_exits_three() {
    let out = bellscope(&["analyze", "--circuit", "no/such/file.json", "--states", "bell:2,2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).starts_with("error[E_IO]:"));
}

#[test]
fn selector_must_match_circuit() {
    let out = bellscope(&["analyze", "--circuit", "circuits/fig1_4x2.circuit.json", "--states", "bell:2,2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn classify_group_outputs() {
    let v = json_ok(&["classify-group", "--circuit", "circuits/fig1_4x2.circuit.json"]);
    assert_schema("group", &v);
    assert_eq!(v["group"], "G2");
    assert!(v["witness"]["marginal"].as_f64().unwrap() <= 1e-12);
    let v = json_ok(&["classify-group", "--haar-seed", "4", "--n", "2", "--d", "3"]);
    assert_schema("group", &v);
    assert_eq!(v["group"], "G1");
}

#[test]
fn search_exports_circuit_and_ll_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("found.json");
    let v = json_ok(&[
        "search",
        "--n",
        "2",
        "--d",
        "2",
        "--budget",
        "200",
        "--restarts",
        "2",
        "--seed",
        "3",
        "--circuit-out",
        circuit.to_str().unwrap(),
    ]);
    assert_schema("search", &v);
    assert_eq!(v["best_classes"], 3);
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&circuit).unwrap()).unwrap();
    assert_schema("circuit", &c);
    assert_eq!(c["provenance"]["seed"], 3);

    let analyzed = json_ok(&["analyze", "--circuit", circuit.to_str().unwrap(), "--states", "bell:2,2"]);
    assert_eq!(analyzed["class_count"], 3);

    let ll = json_ok(&["ll-check", "--circuit", circuit.to_str().unwrap()]);
    assert_schema("ll-check", &ll);
    assert_eq!(ll["disagreements"], 0);
    assert_eq!(ll["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn search_is_byte_stable() {
    let args = ["search", "--n", "2", "--d", "3", "--budget", "150", "--restarts", "3", "--seed", "8"];
    let a = bellscope(&args);
    let b = bellscope(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_bellscope"))
            .args(["audit", "--n", "2", "--d", "2", "--samples", "30", "--seed", "1"])
            .env("BELLSCOPE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_schema("audit", &v);
    assert_eq!(run("0").status.code(), Some(2));
}

#[test]
fn reproduce_matches_committed_golden() {
    let out = bellscope(&["reproduce", "all"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    for name in ["table1", "fig1", "fig4", "hom"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(root().join(format!("golden/{name}.json"))).unwrap())
            .unwrap();
        assert_schema("scenario", &v);
    }
}

#[test]
fn reproduce_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(root().join("golden/table1.json")).unwrap();
    std::fs::write(dir.path().join("table1.json"), golden.replacen("\"n1\": 10", "\"n1\": 11", 1)).unwrap();
    let out = bellscope(&["reproduce", "table1", "--golden-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("FAIL table1"));
    assert!(text.contains("$.rows[2].n1"));
    assert!(stderr_line(&out).starts_with("error[E_MISMATCH]:"));
}

#[test]
fn regenerate_refuses_outside_clean_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = bellscope(&["reproduce", "hom", "--regenerate", "--golden-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).starts_with("error[E_DIRTY]:"));
    assert!(!dir.path().join("hom.json").exists());
}

#[test]
fn regenerate_writes_in_clean_repo() {
    let dir = tempfile::tempdir().unwrap();
    let git = |args: &[&str]| {
        Command::new("git")
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("git available")
    };
    if !git(&["init", "-q"]).status.success() {
        return;
    }
    let out = bellscope(&["reproduce", "hom", "--regenerate", "--golden-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(dir.path().join("hom.json")).unwrap();
    let committed = std::fs::read_to_string(root().join("golden/hom.json")).unwrap();
    assert_eq!(written, committed);
}
