//! Repeated k-fold cross-validation objective.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auc_from_scores, LossMeasurement, Metric, Objective};
use crate::classifiers::ClassifierKind;
use crate::data::{Dataset, StandardizationParams};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::rng::{derive_seed, stream, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub repetitions: usize,
    pub metric: Metric,
    pub stratified: bool,
    /// Z-score features with statistics fitted on each training partition.
    pub standardize: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            repetitions: 10,
            metric: Metric::ErrorRate,
            stratified: false,
            standardize: true,
        }
    }
}

impl CvConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if self.folds > n {
            return Err(Error::InvalidConfig(format!(
                "folds ({}) exceed instance count ({n})",
                self.folds
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fold index of every instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub folds: usize,
}

impl FoldAssignment {
    /// Instance indices per fold, each in ascending order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.folds];
        for (i, &f) in self.fold_of.iter().enumerate() {
            groups[f].push(i);
        }
        groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

fn check_folds(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidConfig(format!(
            "fold count {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    Ok(())
}

/// Uniformly random partition into `k` folds whose sizes differ by at most one.
pub fn make_folds(n: usize, k: usize, rng: &mut Stream) -> Result<FoldAssignment> {
    check_folds(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of, folds: k })
}

/// Like [`make_folds`] but deals each class round-robin so class proportions
/// are preserved as far as possible.
pub fn make_stratified_folds(labels: &[usize], k: usize, rng: &mut Stream) -> Result<FoldAssignment> {
    let n = labels.len();
    check_folds(n, k)?;
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut fold_of = vec![0; n];
    let mut pos = 0;
    for members in &mut by_class {
        members.shuffle(rng);
        for &i in members.iter() {
            fold_of[i] = pos % k;
            pos += 1;
        }
    }
    Ok(FoldAssignment { fold_of, folds: k })
}

/// Mean of repeated k-fold CV error (or AUC) of a classifier restricted to
/// the masked features.
#[derive(Clone, Debug)]
pub struct CvObjective {
    dataset: Arc<Dataset>,
    classifier: ClassifierKind,
    cv: CvConfig,
}

impl CvObjective {
    pub fn new(dataset: Arc<Dataset>, classifier: ClassifierKind, cv: CvConfig) -> Result<Self> {
        cv.validate(dataset.n())?;
        if cv.metric == Metric::Auc && dataset.class_count() != 2 {
            return Err(Error::InvalidConfig(format!(
                "AUC needs exactly two classes, dataset has {}",
                dataset.class_count()
            )));
        }
        Ok(Self {
            dataset,
            classifier,
            cv,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn classifier(&self) -> ClassifierKind {
        self.classifier
    }

    pub fn cv(&self) -> &CvConfig {
        &self.cv
    }

    /// One full k-fold pass with folds drawn from `seed`.
    pub fn repetition(&self, columns: &[usize], seed: u64) -> Result<f64> {
        let data = &*self.dataset;
        let mut rng = stream(seed);
        let assignment = if self.cv.stratified {
            make_stratified_folds(data.labels(), self.cv.folds, &mut rng)?
        } else {
            make_folds(data.n(), self.cv.folds, &mut rng)?
        };
        let groups = assignment.groups();

        let mut total = 0.0;
        let mut counted = 0usize;
        for (f, test_rows) in groups.iter().enumerate() {
            let train_rows: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let mut train_x = data.features().select(&train_rows, columns);
            let mut test_x = data.features().select(test_rows, columns);
            if self.cv.standardize {
                let params = StandardizationParams::fit(&train_x)?;
                params.apply_in_place(&mut train_x)?;
                params.apply_in_place(&mut test_x)?;
            }
            let train_y: Vec<usize> = train_rows.iter().map(|&i| data.labels()[i]).collect();
            let test_y: Vec<usize> = test_rows.iter().map(|&i| data.labels()[i]).collect();
            let pred = self
                .classifier
                .fit_predict(&train_x, &train_y, data.class_count(), &test_x, &mut rng)?;
            match self.cv.metric {
                Metric::ErrorRate => {
                    let wrong = pred.labels.iter().zip(&test_y).filter(|(p, y)| p != y).count();
                    total += wrong as f64 / test_y.len() as f64;
                    counted += 1;
                }
                Metric::Auc => {
                    let positive: Vec<bool> = test_y.iter().map(|&y| y == 1).collect();
                    // A fold holding a single class has no AUC; it is skipped.
                    match auc_from_scores(&pred.scores, &positive) {
                        Ok(auc) => {
                            total += auc;
                            counted += 1;
                        }
                        Err(Error::UndefinedAuc(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        if counted == 0 {
            return Err(Error::UndefinedAuc("no fold contained both classes".into()));
        }
        Ok(total / counted as f64)
    }
}

impl Objective for CvObjective {
    fn dimension(&self) -> usize {
        self.dataset.p()
    }

    fn metric(&self) -> Metric {
        self.cv.metric
    }

    fn measure(&self, mask: &FeatureMask, seed: u64) -> Result<LossMeasurement> {
        if mask.len() != self.dataset.p() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.p(),
                actual: mask.len(),
            });
        }
        if mask.is_none_selected() {
            return Ok(LossMeasurement::penalty(
                self.cv.metric,
                mask.clone(),
                self.cv.repetitions,
            ));
        }
        let columns = mask.selected_indices();
        let values = (0..self.cv.repetitions)
            .into_par_iter()
            .map(|r| self.repetition(&columns, derive_seed(seed, r as u64)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(LossMeasurement::from_repetitions(self.cv.metric, mask.clone(), values))
    }
}
