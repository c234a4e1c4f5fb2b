use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn misre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_misre")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_points_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = misre(&["synth", "--scenario", "five-lines", "--seed", "7", "--output", path(p)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1350);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let labels = fs::read_to_string(a.with_extension("labels")).unwrap();
    assert_eq!(labels.lines().count(), 1350);

    let e = dir.path().join("e.csv");
    let o = misre(&["synth", "--scenario", "three-ellipses", "--output", path(&e)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&e).unwrap().lines().count(), 1100);
}

#[test]
fn fit_flags_an_exact_line_and_writes_documents() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("line.csv");
    let rows: String = (0..30).map(|i| format!("{},{}\n", i, 2 * i + 1)).collect();
    fs::write(&input, format!("x,y\n{rows}")).unwrap();
    let json = dir.path().join("fit.json");
    let svg = dir.path().join("fit.svg");
    let o = misre(&[
        "fit", "--model", "line2d", "--input", path(&input), "--trials", "50", "--output", path(&json), "--svg",
        path(&svg), "--view", "0,0,40,80",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("exact"));

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(doc["schema_version"].is_number());
    assert_eq!(doc["structures"][0]["n_in"], 30);
    assert!(fs::read_to_string(&svg).unwrap().contains("viewBox=\"0 0 40 80\""));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.csv");
    fs::write(&input, "0,0\n1,1\n").unwrap();
    let code = |args: &[&str]| misre(args).status.code().unwrap();

    assert_eq!(code(&["fit", "--model", "line2d", "--input", path(&input), "--trials", "0"]), 2);
    assert_eq!(code(&["fit", "--model", "torus", "--input", path(&input)]), 2);
    assert_eq!(code(&["bench", "--scenario", "nowhere"]), 2);
    assert_eq!(code(&["fit", "--model", "line2d", "--input", path(&dir.path().join("missing.csv"))]), 3);
    assert_eq!(code(&["--threads", "0", "bench", "--scenario", "single-line"]), 2);
}

#[test]
fn bench_runs_a_single_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = misre(&["bench", "--scenario", "single-line", "--repeats", "1", "--output", path(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("all recovered"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["runs"].as_array().unwrap().len(), 1);
}
