use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::baselines::{run_bga, run_sequential, SequentialConfig};
use crate::classifiers::ClassifierKind;
use crate::data::{load_csv, CsvOptions, Dataset};
use crate::error::Result;
use crate::mask::FeatureMask;
use crate::objective::{evaluate, CvObjective, LossMeasurement, Metric};
use crate::rng::{derive_seed, derive_seed_str};
use crate::spsa::{self, FsResult, Termination};
use crate::stats::{self, ComparisonReport, GroupSamples};

/// Salt separating the reporting measurement from the search's own draws.
const REPORT_SALT: u64 = 0x7265_706f_7274;

/// Full outcome of one (dataset, classifier, method) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub method: String,
    pub seed: u64,
    pub search: FsResult,
    /// Fresh measurement of the returned mask, used for all reported numbers.
    pub report: LossMeasurement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub method: String,
    pub seed: u64,
    pub metric: Metric,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub selected_count: Option<usize>,
    pub mask: Option<FeatureMask>,
    pub evaluations: Option<usize>,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
    pub error: Option<String>,
    /// Excluded from the reproducible report; see [`ExperimentReport::timings`].
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub report: Option<ComparisonReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub master_seed: u64,
    pub metric: Metric,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<ComparisonEntry>,
    /// Per-cell search outcomes with traces, in cell order; not serialized.
    #[serde(skip)]
    pub records: Vec<Option<CellRecord>>,
}

impl ExperimentReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    /// Wall time per cell, in cell order.
    pub fn timings(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.wall_seconds).collect()
    }
}

pub fn cell_seed(master: u64, dataset: &str, classifier: ClassifierKind, method: &str) -> u64 {
    derive_seed_str(master, &[dataset, classifier.name(), method])
}

/// Runs one method on one objective and measures the result afresh.
pub fn run_cell(
    objective: &CvObjective,
    method: &Method,
    large: bool,
    seed: u64,
) -> Result<(FsResult, LossMeasurement)> {
    let report_seed = derive_seed(seed, REPORT_SALT);
    let search = match method {
        Method::Full => {
            let mask = FeatureMask::full(objective.dataset().p());
            let m = evaluate(objective, &mask, report_seed)?;
            let result = FsResult {
                best_mask: mask,
                best_measurement: m.clone(),
                evaluations: 1,
                iterations: 0,
                trace: Vec::new(),
                termination: Termination::SingleEvaluation,
            };
            return Ok((result, m));
        }
        Method::Bspsa(_) | Method::Cspsa(_) => {
            let (schedule, run) = method.spsa_settings(large, seed).expect("spsa method");
            spsa::run(objective, schedule, run)?
        }
        Method::Bga(_) => run_bga(objective, &method.ga_settings(large, seed).expect("ga method"))?,
        Method::Sequential {
            direction,
            floating,
            overrides,
        } => {
            let cfg = SequentialConfig {
                direction: *direction,
                floating: *floating,
                master_seed: seed,
                max_evaluations: overrides.max_evaluations,
            };
            run_sequential(objective, &cfg)?.result
        }
    };
    let fresh = evaluate(objective, &search.best_mask, report_seed)?;
    Ok((search, fresh))
}

fn failed(
    dataset: &str,
    classifier: ClassifierKind,
    method: &str,
    seed: u64,
    metric: Metric,
    err: String,
) -> CellSummary {
    CellSummary {
        dataset: dataset.to_string(),
        classifier,
        method: method.to_string(),
        seed,
        metric,
        mean: None,
        std_error: None,
        selected_count: None,
        mask: None,
        evaluations: None,
        iterations: None,
        termination: None,
        error: Some(err),
        wall_seconds: 0.0,
    }
}

/// Runs every cell in order. Failures are recorded in the report and do not
/// stop the remaining cells. `progress` is called after each cell.
pub fn run_experiment(config: &ExperimentConfig, mut progress: impl FnMut(&CellSummary)) -> ExperimentReport {
    let metric = config.metric();
    let mut report = ExperimentReport {
        master_seed: config.master_seed,
        metric,
        cells: Vec::new(),
        comparisons: Vec::new(),
        records: Vec::new(),
    };
    let options = CsvOptions {
        has_header: config.has_header,
        label_column: config.label_column.clone(),
    };

    for entry in &config.datasets {
        let dataset: std::result::Result<Arc<Dataset>, String> =
            load_csv(&entry.path, &options).map(Arc::new).map_err(|e| e.to_string());
        for &classifier in &config.classifiers {
            let objective = dataset
                .clone()
                .and_then(|d| CvObjective::new(d, classifier, config.cv.clone()).map_err(|e| e.to_string()));
            let mut groups = Vec::new();
            for method in &config.methods {
                let name = method.name();
                let seed = cell_seed(config.master_seed, &entry.name, classifier, name);
                let started = Instant::now();
                let outcome = objective.as_ref().map_err(Clone::clone).and_then(|obj| {
                    let large = config.profile.is_large(obj.dataset().p());
                    run_cell(obj, method, large, seed).map_err(|e| e.to_string())
                });
                let mut summary = match outcome {
                    Ok((search, fresh)) => {
                        groups.push((name.to_string(), fresh.losses()));
                        let summary = CellSummary {
                            dataset: entry.name.clone(),
                            classifier,
                            method: name.to_string(),
                            seed,
                            metric,
                            mean: Some(fresh.mean),
                            std_error: Some(fresh.std_error),
                            selected_count: Some(search.best_mask.selected_count()),
                            mask: Some(search.best_mask.clone()),
                            evaluations: Some(search.evaluations),
                            iterations: Some(search.iterations),
                            termination: Some(search.termination),
                            error: None,
                            wall_seconds: 0.0,
                        };
                        report.records.push(Some(CellRecord {
                            dataset: entry.name.clone(),
                            classifier,
                            method: name.to_string(),
                            seed,
                            search,
                            report: fresh,
                        }));
                        summary
                    }
                    Err(err) => {
                        report.records.push(None);
                        failed(&entry.name, classifier, name, seed, metric, err)
                    }
                };
                summary.wall_seconds = started.elapsed().as_secs_f64();
                progress(&summary);
                report.cells.push(summary);
            }
            report
                .comparisons
                .push(compare_cell_group(&entry.name, classifier, groups));
        }
    }
    report
}

fn compare_cell_group(dataset: &str, classifier: ClassifierKind, groups: Vec<(String, Vec<f64>)>) -> ComparisonEntry {
    let outcome = GroupSamples::new(groups).and_then(|g| stats::compare(&g, stats::ALPHA, stats::DEFAULT_SEED));
    let (report, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ComparisonEntry {
        dataset: dataset.to_string(),
        classifier,
        report,
        error,
    }
}
