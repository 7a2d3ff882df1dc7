mod common;

use std::fs;
use std::path::Path;

use spsa_fs::experiment::{run_experiment, write_outputs, ExperimentConfig, ExperimentReport};
use spsa_fs::Termination;

fn write_dataset(dir: &Path, name: &str, seed: u64) {
    let data = common::shifted_gaussians(40, 6, 2, 1.0, seed);
    let mut text = String::from("f1,f2,f3,f4,f5,f6,label\n");
    for i in 0..data.n() {
        let row: Vec<String> = data.features().row(i).iter().map(|v| format!("{v:.6}")).collect();
        text += &format!(
            "{},{}\n",
            row.join(","),
            if data.labels()[i] == 0 { "neg" } else { "pos" }
        );
    }
    fs::write(dir.join(format!("{name}.csv")), text).unwrap();
}

const CONFIG: &str = r#"
master_seed = 11
classifiers = ["1nn", "c45"]
[dataset]
paths = ["alpha.csv", "missing.csv"]
[cv]
repetitions = 3
[methods.full]
[methods.bspsa]
max_iterations = 12
[methods.bga]
population_size = 6
max_generations = 3
[methods.sfs]
[methods.sbfs]
max_evaluations = 15
[output]
directory = "out"
"#;

fn run(dir: &Path, text: &str) -> (ExperimentConfig, ExperimentReport) {
    fs::write(dir.join("exp.toml"), text).unwrap();
    let config = ExperimentConfig::load(&dir.join("exp.toml")).unwrap();
    let report = run_experiment(&config, |_| {});
    write_outputs(&report, &config.output_dir).unwrap();
    (config, report)
}

#[test]
fn cells_budgets_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "alpha", 1);
    let (config, report) = run(dir.path(), CONFIG);
    assert_eq!(report.cells.len(), 2 * 2 * 5);

    let ok: Vec<_> = report.cells.iter().filter(|c| c.dataset == "alpha").collect();
    assert!(ok.iter().all(|c| c.error.is_none()), "{ok:?}");
    for c in &ok {
        let evals = c.evaluations.unwrap();
        match c.method.as_str() {
            "full" => {
                assert_eq!(evals, 1);
                assert_eq!(c.termination, Some(Termination::SingleEvaluation));
            }
            "bspsa" => assert!(evals <= 3 * 12),
            "bga" => assert!(evals <= 6 * 4),
            "sbfs" => assert!(evals <= 15),
            _ => {}
        }
        assert!(c.selected_count.unwrap() >= 1);
    }
    let missing: Vec<_> = report.cells.iter().filter(|c| c.dataset == "missing").collect();
    assert_eq!(missing.len(), 10);
    assert!(missing
        .iter()
        .all(|c| c.error.as_deref().is_some_and(|e| e.contains("missing.csv"))));
    assert_eq!(report.failed_cells(), 10);

    let out = &config.output_dir;
    assert!(out.join("report.json").exists());
    assert!(out.join("report.txt").exists());
    assert!(!out.join("traces/alpha__1nn__full.csv").exists());
    let trace = fs::read_to_string(out.join("traces/alpha__1nn__bspsa.csv")).unwrap();
    assert!(trace.starts_with("iteration,y_plus,y_minus,y_iterate,best_so_far,selected_count\n"));

    // Every table row with a value has its raw samples on disk.
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    for c in &ok {
        let prefix = format!("alpha,{},{},", c.classifier, c.method);
        assert_eq!(
            samples.lines().filter(|l| l.starts_with(&prefix)).count(),
            3,
            "{prefix}"
        );
    }
    let table = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(table.contains("failed missing/1nn/full"));
}

#[test]
fn reruns_are_bit_identical_and_cells_are_independent() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "alpha", 2);
    let (config, first) = run(dir.path(), CONFIG);
    let json_a = fs::read(config.output_dir.join("report.json")).unwrap();
    let samples_a = fs::read(config.output_dir.join("samples.csv")).unwrap();
    let (_, second) = run(dir.path(), CONFIG);
    assert_eq!(json_a, fs::read(config.output_dir.join("report.json")).unwrap());
    assert_eq!(samples_a, fs::read(config.output_dir.join("samples.csv")).unwrap());
    let json = |cells: &[spsa_fs::experiment::CellSummary]| serde_json::to_string(cells).unwrap();
    assert_eq!(json(&first.cells), json(&second.cells));

    // Dropping a method leaves the other cells untouched. Wall times are
    // excluded from the serialized form.
    let (_, fewer) = run(dir.path(), &CONFIG.replace("[methods.sfs]\n", ""));
    for c in &fewer.cells {
        let same = first
            .cells
            .iter()
            .find(|o| o.dataset == c.dataset && o.classifier == c.classifier && o.method == c.method)
            .unwrap();
        assert_eq!(json(std::slice::from_ref(c)), json(std::slice::from_ref(same)));
    }
}

#[test]
fn full_only_config_evaluates_once_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "alpha", 3);
    let text = "classifiers = [\"svm\"]\n[dataset]\npaths = [\"alpha.csv\"]\n[methods.full]\n";
    let (_, report) = run(dir.path(), text);
    assert_eq!(report.cells.len(), 1);
    assert_eq!(report.cells[0].evaluations, Some(1));
    assert_eq!(report.records[0].as_ref().unwrap().search.trace.len(), 0);
    // One group cannot be compared.
    assert!(report.comparisons[0].report.is_none());
}

#[test]
fn auc_experiment_reports_auc() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "alpha", 4);
    let text =
        "[dataset]\npaths = [\"alpha.csv\"]\n[cv]\nmetric = \"auc\"\nrepetitions = 4\n[methods.full]\n[methods.sfs]\n";
    let (_, report) = run(dir.path(), text);
    for c in &report.cells {
        let auc = c.mean.unwrap();
        assert!((0.5..=1.0).contains(&auc), "{auc}");
    }
    let cmp = report.comparisons[0].report.as_ref().unwrap();
    assert_eq!(cmp.groups, ["full", "sfs"]);
}
