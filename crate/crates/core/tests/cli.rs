use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spsa-fs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_inputs(dir: &Path) {
    let mut text = String::from("a,b,c,label\n");
    for i in 0..30 {
        let x = i as f64;
        text += &format!(
            "{},{},{},{}\n",
            (x * 0.7).sin(),
            x % 4.0,
            (x * 1.9).cos(),
            if i % 3 == 0 { "y" } else { "n" }
        );
    }
    fs::write(dir.join("tiny.csv"), text).unwrap();
    fs::write(
        dir.join("exp.toml"),
        "master_seed = 3\n[dataset]\npaths = [\"tiny.csv\"]\n[cv]\nrepetitions = 2\n[methods.full]\n[methods.bspsa]\nmax_iterations = 5\n",
    )
    .unwrap();
}

#[test]
fn validate_accepts_good_and_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let ok = cli(&["validate", "exp.toml"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("2 method(s)"));

    fs::write(
        dir.path().join("bad.toml"),
        "classifiers = [\"forest\"]\n[dataset]\npaths = [\"tiny.csv\"]\n",
    )
    .unwrap();
    let bad = cli(&["validate", "bad.toml"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("classifiers[0]"));

    assert_eq!(cli(&["validate", "absent.toml"], dir.path()).status.code(), Some(1));
}

#[test]
fn run_then_trace_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let run = cli(&["run", "exp.toml"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let results = dir.path().join("results");
    let report = fs::read_to_string(results.join("report.json")).unwrap();

    let trace = cli(&["trace", "results/cells/tiny__1nn__bspsa.json", "t.csv"], dir.path());
    assert_eq!(trace.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let cell: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(results.join("cells/tiny__1nn__bspsa.json")).unwrap()).unwrap();
    let iterations = cell["search"]["iterations"].as_u64().unwrap() as usize;
    assert!((1..=5).contains(&iterations));
    assert_eq!(csv.lines().count(), 1 + iterations);
    assert_eq!(
        csv,
        fs::read_to_string(results.join("traces/tiny__1nn__bspsa.csv")).unwrap()
    );

    let reseeded = cli(&["run", "exp.toml", "--seed", "4"], dir.path());
    assert_eq!(reseeded.status.code(), Some(0));
    let other = fs::read_to_string(results.join("report.json")).unwrap();
    assert_ne!(report, other);
    assert!(other.contains("\"master_seed\": 4"));

    assert_eq!(
        cli(&["trace", "nothing.json", "t.csv"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn failed_cell_gives_runtime_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    fs::write(
        dir.path().join("gone.toml"),
        "[dataset]\npaths = [\"gone.csv\"]\n[methods.full]\n",
    )
    .unwrap();
    let out = cli(&["run", "gone.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("failed"));
}
