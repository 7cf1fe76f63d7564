use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vkit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn square_csv(dir: &TempDir) -> String {
    let file = dir.path().join("square.csv");
    std::fs::write(&file, "x,y\n0,0\n1,0\n1,1\n0,1\n").unwrap();
    path(&file).to_string()
}

#[test]
fn help_and_version() {
    assert_eq!(code(&vkit(&["--help"])), 0);
    for sub in ["persist", "fk", "straighten", "verify"] {
        let out = vkit(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub} --help");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--"));
    }
    assert_eq!(code(&vkit(&["--version"])), 0);
    assert_eq!(code(&vkit(&["no-such-command"])), 2);
}

#[test]
fn persist_writes_square_diagram() {
    let dir = TempDir::new().unwrap();
    let input = square_csv(&dir);
    let out = dir.path().join("out");
    let run = vkit(&["persist", "--input", &input, "--out", path(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("diagram.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dim,birth,death");
    assert_eq!(lines.iter().filter(|l| l.starts_with("0,")).count(), 4);
    assert!(lines.contains(&"0,0,inf"));
    assert!(lines.iter().any(|l| l.starts_with("1,1,1.414213562373")));
    assert!(std::fs::read_to_string(out.join("diagram.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn persist_matrix_and_threshold() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("m.csv");
    std::fs::write(&file, "0,1,2\n1,0,1\n2,1,0\n").unwrap();
    let out = dir.path().join("out");
    let run = vkit(&[
        "persist",
        "--input",
        path(&file),
        "--format",
        "matrix",
        "--r",
        "1.5",
        "--kmax",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("diagram.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("0,")).count(), 3);
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let bad_metric = dir.path().join("bad.csv");
    std::fs::write(&bad_metric, "0,1,3\n1,0,1\n3,1,0\n").unwrap();
    let out = path(dir.path());
    assert_eq!(code(&vkit(&["persist", "--input", path(&empty), "--out", out])), 2);
    assert_eq!(code(&vkit(&["persist", "--input", "/nonexistent/x.csv", "--out", out])), 2);
    assert_eq!(code(&vkit(&["persist", "--input", path(&bad_metric), "--format", "matrix", "--out", out])), 2);
    assert_eq!(code(&vkit(&["fk", "--n", "0", "--res", "2", "--out", out])), 2);
    assert_eq!(code(&vkit(&["fk", "--n", "5", "--res", "10", "--out", out])), 2);
    assert_eq!(code(&vkit(&["straighten", "--generator", "nope", "--out", out])), 2);
    assert_eq!(code(&vkit(&["straighten", "--generator", "two-ball", "--pmass", "1.5", "--out", out])), 2);
}

#[test]
fn fk_writes_mesh_and_certificate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fk");
    let run = vkit(&["fk", "--n", "2", "--res", "2", "--out", path(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let off = std::fs::read_to_string(out.join("mesh.off")).unwrap();
    assert!(off.starts_with("OFF"));
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["simplex_count"], 8);
    assert_eq!(cert["expected_count"], 8);
}

#[test]
fn straighten_success_and_stage_failure() {
    let dir = TempDir::new().unwrap();
    let ok = dir.path().join("ok");
    let run = vkit(&["straighten", "--generator", "two-ball", "--n", "2", "--out", path(&ok)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ok.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["failed"], 0);
    assert!(ok.join("map.json").exists());
    let log = std::fs::read_to_string(ok.join("certification.jsonl")).unwrap();
    for line in log.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["pass"], true);
    }

    let bad = dir.path().join("bad");
    let run = vkit(&["straighten", "--generator", "spread", "--out", path(&bad)]);
    assert_eq!(code(&run), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bad.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed_stage"], "label");
    assert!(!bad.join("map.json").exists());
}

#[test]
fn straighten_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("map.json");
    std::fs::write(
        &spec,
        r#"{"points": [[0],[1],[2]], "cover": {"ball": 1.5}, "dim": 1, "resolution": 2,
            "values": [{"support":[0],"weights":[1]}, {"support":[1],"weights":[1]}, {"support":[2],"weights":[1]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = vkit(&["straighten", "--input", path(&spec), "--out", path(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn verify_passes_and_flags_bad_input() {
    let run = vkit(&["verify", "--trials", "20"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stdout));
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0,1,3\n1,0,1\n3,1,0\n").unwrap();
    let run = vkit(&["verify", "--trials", "0", "--input", path(&bad)]);
    assert_eq!(code(&run), 1);
    assert!(String::from_utf8_lossy(&run.stderr).contains("warning"));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    let input = square_csv(&dir);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(code(&vkit(&["persist", "--input", &input, "--filtration", "cech", "--out", path(out)])), 0);
    }
    assert_eq!(std::fs::read(a.join("diagram.csv")).unwrap(), std::fs::read(b.join("diagram.csv")).unwrap());
    let v1 = vkit(&["verify", "--trials", "10", "--seed", "3"]);
    let v2 = vkit(&["verify", "--trials", "10", "--seed", "3"]);
    assert_eq!(v1.stdout, v2.stdout);
}
