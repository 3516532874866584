use std::process::{Command, Output};

fn qrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrac")).args(args).output().expect("run qrac")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn teleport_table_output() {
    let o = qrac(&["teleport", "--d", "3", "--k", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("4/9"));
    assert!(text.contains("0.583333"));
}

#[test]
fn teleport_json_fields() {
    let o = qrac(&["--format", "json", "teleport", "--d", "2", "--k", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exact"], "3/4");
    assert!((v["entanglement_fidelity"].as_f64().unwrap() - 0.75).abs() < 1e-10);
    assert!((v["transmission_fidelity"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-10);
}

#[test]
fn qracse_qubit_row() {
    let o = qrac(&["qracse", "--d", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("0.728553"));
    assert!(text.contains("0.625000"));
}

#[test]
fn qracse_json_has_per_string_map() {
    let o = qrac(&["--format", "json", "qracse", "--d", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let per = v["report"]["per_string"]["c=0"].as_object().unwrap();
    assert_eq!(per.len(), 9);
    assert!((v["report"]["p_min"].as_f64().unwrap() - 0.424029).abs() < 1e-6);
}

#[test]
fn bounds_csv() {
    let o = qrac(&["--format", "csv", "bounds", "symmetric", "--d", "2", "--N", "2"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bound,value,exact"));
    assert!(lines.next().unwrap().ends_with(",0.75,3/4"));
}

#[test]
fn werner_and_asym() {
    assert!(stdout(&qrac(&["bounds", "werner", "--n1", "1", "--n2", "2", "--d", "2"])).contains("5/6"));
    let o = qrac(&["--format", "json", "bounds", "asym", "--d", "2", "--p", "0.5", "--p", "0.5", "--restarts", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0.75"));
}

#[test]
fn out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = qrac(&["--format", "json", "--out", path.to_str().unwrap(), "teleport", "--d", "2", "--k", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["exact"], "1/2");
}

#[test]
fn reproduce_all_honours_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qrac"))
        .args(["reproduce-all", "--seed", "3"])
        .env("QRAC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("criterion_04.csv").exists());
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("PASS") || l.contains("FAIL")).count(), 11);
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(qrac(&["teleport", "--d", "1", "--k", "1"]).status.code(), Some(2));
    assert_eq!(qrac(&["teleport", "--d", "2", "--k", "9"]).status.code(), Some(2));
    assert_eq!(qrac(&["qracse", "--d", "2", "--variant", "nope"]).status.code(), Some(2));
}
