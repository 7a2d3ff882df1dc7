//! Wrapper classifiers used inside the cross-validation objective.

pub mod knn;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::Stream;

pub use knn::nn_predict;
pub use svm::{LinearSvm, SvmParams};
pub use tree::{gain_ratio_split, Split, TreeModel, TreeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "1nn")]
    NearestNeighbor,
    #[serde(rename = "c45")]
    C45,
    #[serde(rename = "svm")]
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::NearestNeighbor,
        ClassifierKind::C45,
        ClassifierKind::LinearSvm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::NearestNeighbor => "1nn",
            ClassifierKind::C45 => "c45",
            ClassifierKind::LinearSvm => "svm",
        }
    }

    /// Fits on `train_x`/`train_y` and predicts `test_x`.
    ///
    /// `rng` is only consumed by classifiers with randomized training (SVM).
    pub fn fit_predict(
        self,
        train_x: &Matrix,
        train_y: &[usize],
        class_count: usize,
        test_x: &Matrix,
        rng: &mut Stream,
    ) -> Result<Predictions> {
        if train_x.rows() != train_y.len() {
            return Err(Error::DimensionMismatch {
                expected: train_x.rows(),
                actual: train_y.len(),
            });
        }
        if train_x.cols() != test_x.cols() {
            return Err(Error::DimensionMismatch {
                expected: train_x.cols(),
                actual: test_x.cols(),
            });
        }
        match self {
            ClassifierKind::NearestNeighbor => {
                let labels = nn_predict(train_x, train_y, test_x)?;
                let scores = labels.iter().map(|&l| if l == 1 { 1.0 } else { 0.0 }).collect();
                Ok(Predictions { labels, scores })
            }
            ClassifierKind::C45 => {
                let model = TreeModel::fit(train_x, train_y, class_count, &TreeParams::default())?;
                let (labels, scores) = (0..test_x.rows())
                    .map(|i| {
                        let leaf = model.leaf_for(test_x.row(i));
                        (leaf.class, leaf.class_fraction(1))
                    })
                    .unzip();
                Ok(Predictions { labels, scores })
            }
            ClassifierKind::LinearSvm => {
                let model = LinearSvm::fit(train_x, train_y, class_count, &SvmParams::default(), rng)?;
                let (labels, scores) = (0..test_x.rows())
                    .map(|i| {
                        let s = model.scores(test_x.row(i));
                        let score = if s.len() >= 2 { s[1] - s[0] } else { 0.0 };
                        (argmax(&s), score)
                    })
                    .unzip();
                Ok(Predictions { labels, scores })
            }
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1nn" | "nn" | "knn" => Ok(ClassifierKind::NearestNeighbor),
            "c45" | "c4.5" | "tree" => Ok(ClassifierKind::C45),
            "svm" | "linear-svm" | "linear_svm" => Ok(ClassifierKind::LinearSvm),
            other => Err(Error::InvalidConfig(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Predicted labels plus a real-valued score for class 1, used for AUC on
/// two-class problems.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn names_roundtrip() {
        for kind in ClassifierKind::ALL {
            assert_eq!(kind.name().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!("forest".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn column_mismatch_is_rejected() {
        let train = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let test = Matrix::from_rows(&[vec![0.0]]).unwrap();
        for kind in ClassifierKind::ALL {
            let err = kind.fit_predict(&train, &[0, 1], 2, &test, &mut stream(0));
            assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        }
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[2.0]), 0);
    }

    /// Permuting the columns of train and test identically must not change
    /// 1-NN or SVM predictions.
    #[test]
    fn column_permutation_invariance() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                vec![
                    (t * 0.7).sin(),
                    (t * 1.9).cos(),
                    t / 30.0,
                    ((t * 0.3).sin() * 5.0).round(),
                ]
            })
            .collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + r[2] > 0.5)).collect();
        let order = [2, 0, 3, 1];
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| order.iter().map(|&j| r[j]).collect()).collect();
        let (train, test) = (
            Matrix::from_rows(&rows[..20]).unwrap(),
            Matrix::from_rows(&rows[20..]).unwrap(),
        );
        let (ptrain, ptest) = (
            Matrix::from_rows(&permuted[..20]).unwrap(),
            Matrix::from_rows(&permuted[20..]).unwrap(),
        );
        for kind in [ClassifierKind::NearestNeighbor, ClassifierKind::LinearSvm] {
            let a = kind
                .fit_predict(&train, &labels[..20], 2, &test, &mut stream(3))
                .unwrap();
            let b = kind
                .fit_predict(&ptrain, &labels[..20], 2, &ptest, &mut stream(3))
                .unwrap();
            assert_eq!(a.labels, b.labels, "{kind}");
        }
    }
}
