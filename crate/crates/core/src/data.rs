//! Dataset ingestion, validation, and per-fold standardization.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            data,
            rows: rows.len(),
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Copies out the given rows restricted to the given columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let src = self.row(r);
            data.extend(cols.iter().map(|&c| src[c]));
        }
        Matrix {
            data,
            rows: rows.len(),
            cols: cols.len(),
        }
    }
}

/// Labelled classification data: an n×p feature matrix and class indices.
#[derive(Clone, Debug)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates and assembles a dataset. Labels must be class indices in
    /// `0..class_names.len()`, every class must be non-empty.
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                actual: labels.len(),
            });
        }
        if class_names.len() < 2 {
            return Err(Error::Data(format!(
                "need at least two classes, found {}",
                class_names.len()
            )));
        }
        let mut seen = vec![0usize; class_names.len()];
        for &y in &labels {
            if y >= class_names.len() {
                return Err(Error::Data(format!("label index {y} out of range")));
            }
            seen[y] += 1;
        }
        if let Some(empty) = seen.iter().position(|&c| c == 0) {
            return Err(Error::Data(format!("class {:?} has no instances", class_names[empty])));
        }
        if let Some(names) = &feature_names {
            if names.len() != features.cols() {
                return Err(Error::DimensionMismatch {
                    expected: features.cols(),
                    actual: names.len(),
                });
            }
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            labels,
            class_names,
            feature_names,
        })
    }

    /// Convenience constructor with class names "0", "1", ...
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize]) -> Result<Self> {
        let class_count = labels.iter().max().map_or(0, |&m| m + 1);
        Self::new(
            Matrix::from_rows(rows)?,
            labels.to_vec(),
            (0..class_count).map(|c| c.to_string()).collect(),
            None,
        )
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Returns a copy with columns reordered so that new column `j` is old
    /// column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Dataset> {
        let rows: Vec<usize> = (0..self.n()).collect();
        let names = self
            .feature_names
            .as_ref()
            .map(|n| order.iter().map(|&j| n[j].clone()).collect());
        Dataset::new(
            self.features.select(&rows, order),
            self.labels.clone(),
            self.class_names.clone(),
            names,
        )
    }

    /// Returns a copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Dataset> {
        let cols: Vec<usize> = (0..self.p()).collect();
        Dataset::new(
            self.features.select(order, &cols),
            order.iter().map(|&i| self.labels[i]).collect(),
            self.class_names.clone(),
            self.feature_names.clone(),
        )
    }
}

/// Which CSV column holds the class label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            label_column: LabelColumn::Last,
        }
    }
}

/// Loads a comma-delimited file. Labels are encoded in first-appearance order.
///
/// Row and column numbers in errors are 1-based and count data rows only.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    read_csv(file, options)
}

pub fn read_csv<R: std::io::Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Data("empty file".into()));
    }

    let width = header.as_ref().map_or_else(|| records[0].len(), Vec::len);
    if width < 2 {
        return Err(Error::Data("need at least one feature and a label column".into()));
    }
    let label_idx = match &options.label_column {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Data(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Data(format!("label column {name:?} not found in header")))?,
    };

    let mut data = Vec::with_capacity(records.len() * (width - 1));
    let mut labels = Vec::with_capacity(records.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();

    for (r, rec) in records.iter().enumerate() {
        let row = r + 1;
        if rec.len() != width {
            return Err(if rec.len() < width {
                Error::MissingValue {
                    row,
                    column: rec.len() + 1,
                }
            } else {
                Error::Data(format!("row {row} has {} cells, expected {width}", rec.len()))
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let column = c + 1;
            if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
                return Err(Error::MissingValue { row, column });
            }
            if c == label_idx {
                let next = class_names.len();
                let idx = *class_index.entry(cell.to_owned()).or_insert_with(|| {
                    class_names.push(cell.to_owned());
                    next
                });
                labels.push(idx);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column,
                    value: cell.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonNumeric {
                        row,
                        column,
                        value: cell.to_owned(),
                    });
                }
                data.push(v);
            }
        }
    }

    if class_names.len() < 2 {
        return Err(Error::Data(format!(
            "single class {:?}; need at least two",
            class_names.first().cloned().unwrap_or_default()
        )));
    }

    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter_map(|(c, name)| (c != label_idx).then_some(name))
            .collect()
    });
    let n = labels.len();
    Dataset::new(Matrix::new(n, width - 1, data)?, labels, class_names, feature_names)
}

/// Per-feature z-score parameters fitted on a training partition.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    /// Sample standard deviations (n−1 denominator); zero for constant features.
    pub sds: Vec<f64>,
}

impl StandardizationParams {
    pub fn fit(train: &Matrix) -> Result<Self> {
        let n = train.rows();
        if n == 0 {
            return Err(Error::Data("cannot standardize an empty partition".into()));
        }
        let p = train.cols();
        let mut means = vec![0.0; p];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(train.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut sds = vec![0.0; p];
        if n > 1 {
            for i in 0..n {
                for ((s, v), m) in sds.iter_mut().zip(train.row(i)).zip(&means) {
                    let d = v - m;
                    *s += d * d;
                }
            }
            for s in &mut sds {
                *s = (*s / (n - 1) as f64).sqrt();
            }
        }
        Ok(Self { means, sds })
    }

    /// Applies the transform. A zero-variance feature maps to 0 for all rows.
    pub fn apply(&self, rows: &Matrix) -> Result<Matrix> {
        let mut out = rows.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, rows: &mut Matrix) -> Result<()> {
        if rows.cols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                actual: rows.cols(),
            });
        }
        let scale: Vec<f64> = self.sds.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 }).collect();
        for i in 0..rows.rows() {
            for ((v, m), k) in rows.row_mut(i).iter_mut().zip(&self.means).zip(&scale) {
                *v = (*v - m) * k;
            }
        }
        Ok(())
    }
}
