use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::runner::{CellRecord, ExperimentReport};
use crate::error::Result;
use crate::objective::Metric;
use crate::spsa::FsResult;

pub const TRACE_HEADER: [&str; 6] = [
    "iteration",
    "y_plus",
    "y_minus",
    "y_iterate",
    "best_so_far",
    "selected_count",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes a search trace as CSV; missing values are left empty.
pub fn emit_trace(result: &FsResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for row in &result.trace {
        w.write_record([
            row.iteration.to_string(),
            opt(row.y_plus),
            opt(row.y_minus),
            opt(row.y_iterate),
            row.best_so_far.to_string(),
            row.selected_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a search result from a cell file or a bare serialized result.
pub fn read_result(path: &Path) -> Result<FsResult> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<CellRecord>(&text) {
        Ok(cell) => Ok(cell.search),
        Err(_) => Ok(serde_json::from_str::<FsResult>(&text)?),
    }
}

fn cell_stem(r: &CellRecord) -> String {
    format!("{}__{}__{}", r.dataset, r.classifier, r.method)
}

fn percent(metric: Metric, v: f64) -> String {
    match metric {
        Metric::ErrorRate => format!("{:.2}", 100.0 * v),
        Metric::Auc => format!("{v:.3}"),
    }
}

/// Aligned plain-text table, one row per cell, with the star marking a
/// statistically better method.
pub fn render_table(report: &ExperimentReport) -> String {
    let value_head = match report.metric {
        Metric::ErrorRate => "error%",
        Metric::Auc => "auc",
    };
    let header = [
        "dataset",
        "classifier",
        "method",
        value_head,
        "se",
        "features",
        "evals",
        "termination",
    ];
    let mut rows: Vec<[String; 8]> = Vec::new();
    for c in &report.cells {
        let starred = report.comparisons.iter().any(|cmp| {
            cmp.dataset == c.dataset
                && cmp.classifier == c.classifier
                && cmp.report.as_ref().and_then(|r| r.best_group.as_deref()) == Some(c.method.as_str())
        });
        let value = c.mean.map_or_else(
            || "failed".to_string(),
            |m| format!("{}{}", percent(c.metric, m), if starred { "*" } else { "" }),
        );
        rows.push([
            c.dataset.clone(),
            c.classifier.to_string(),
            c.method.clone(),
            value,
            c.std_error.map_or_else(String::new, |s| percent(c.metric, s)),
            c.selected_count.map_or_else(String::new, |k| k.to_string()),
            c.evaluations.map_or_else(String::new, |k| k.to_string()),
            c.termination.map_or_else(String::new, |t| t.name().to_string()),
        ]);
    }
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let text: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 3 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", text.join("  ").trim_end());
    };
    line(&header);
    for row in &rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    for c in report.cells.iter().filter(|c| c.error.is_some()) {
        let _ = writeln!(
            out,
            "\nfailed {}/{}/{}: {}",
            c.dataset,
            c.classifier,
            c.method,
            c.error.as_deref().unwrap_or_default()
        );
    }
    out
}

/// Writes all report files under `dir` and returns their paths.
///
/// `report.json`, `report.txt` and `samples.csv` depend only on the config and
/// seed; wall-clock times go to `timings.csv`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("cells"))?;
    fs::create_dir_all(dir.join("traces"))?;
    let mut written = Vec::new();

    let json_path = dir.join("report.json");
    fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
    written.push(json_path);

    let table_path = dir.join("report.txt");
    fs::write(&table_path, render_table(report))?;
    written.push(table_path);

    let samples_path = dir.join("samples.csv");
    let mut samples = csv::Writer::from_path(&samples_path)?;
    samples.write_record(["dataset", "classifier", "method", "repetition", "value"])?;
    for record in report.records.iter().flatten() {
        for (i, v) in record.report.per_repetition.iter().enumerate() {
            samples.write_record([
                record.dataset.clone(),
                record.classifier.to_string(),
                record.method.clone(),
                i.to_string(),
                v.to_string(),
            ])?;
        }
    }
    samples.flush()?;
    written.push(samples_path);

    let timings_path = dir.join("timings.csv");
    let mut timings = fs::File::create(&timings_path)?;
    writeln!(timings, "dataset,classifier,method,wall_seconds")?;
    for c in &report.cells {
        writeln!(
            timings,
            "{},{},{},{:.3}",
            c.dataset, c.classifier, c.method, c.wall_seconds
        )?;
    }
    written.push(timings_path);

    for record in report.records.iter().flatten() {
        let stem = cell_stem(record);
        let cell_path = dir.join("cells").join(format!("{stem}.json"));
        fs::write(&cell_path, serde_json::to_string_pretty(record)?)?;
        written.push(cell_path);
        if !record.search.trace.is_empty() {
            let trace_path = dir.join("traces").join(format!("{stem}.csv"));
            emit_trace(&record.search, &trace_path)?;
            written.push(trace_path);
        }
    }
    Ok(written)
}
