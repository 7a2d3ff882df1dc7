//! Linear one-vs-rest SVM trained by dual coordinate descent on the
//! L2-regularized hinge loss.

use rand::seq::SliceRandom;

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Debug)]
pub struct SvmParams {
    /// Box constraint on the dual variables.
    pub c: f64,
    pub max_epochs: usize,
    /// Stop when the spread of projected gradients in an epoch falls below this.
    pub tolerance: f64,
    /// Value of the constant feature appended to every row for the bias.
    pub bias: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tolerance: 1e-3,
            bias: 1.0,
        }
    }
}

/// One binary problem's solution plus its per-epoch objective log.
#[derive(Clone, Debug)]
pub struct BinarySvm {
    /// Weights; the last entry multiplies the bias feature.
    pub weights: Vec<f64>,
    /// Dual objective ½‖w‖² − Σα after each epoch (minimized).
    pub dual_objective: Vec<f64>,
    /// Primal objective ½‖w‖² + C Σ max(0, 1 − yᵢ w·xᵢ) after each epoch.
    pub primal_objective: Vec<f64>,
    pub epochs: usize,
}

#[derive(Clone, Debug)]
pub struct LinearSvm {
    models: Vec<BinarySvm>,
    bias: f64,
}

impl LinearSvm {
    pub fn fit(x: &Matrix, y: &[usize], class_count: usize, params: &SvmParams, rng: &mut Stream) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Classifier("empty training partition".into()));
        }
        let mut present = vec![false; class_count];
        for &label in y {
            present[label] = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::Classifier(
                "linear SVM needs at least two classes in the training partition".into(),
            ));
        }

        let augmented = augment(x, params.bias);
        let models = if class_count == 2 {
            // The class-0 problem is the class-1 problem with signs flipped,
            // so its solution is the exact negation.
            let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
            let one = train_binary(&augmented, &signs, params, rng);
            let zero = BinarySvm {
                weights: one.weights.iter().map(|w| -w).collect(),
                ..one.clone()
            };
            vec![zero, one]
        } else {
            (0..class_count)
                .map(|c| {
                    let signs: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
                    train_binary(&augmented, &signs, params, rng)
                })
                .collect()
        };
        Ok(Self {
            models,
            bias: params.bias,
        })
    }

    /// Per-class decision values.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.models
            .iter()
            .map(|m| {
                let (w, b) = m.weights.split_at(row.len());
                dot(w, row) + b[0] * self.bias
            })
            .collect()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        (0..x.rows()).map(|i| super::argmax(&self.scores(x.row(i)))).collect()
    }

    pub fn models(&self) -> &[BinarySvm] {
        &self.models
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn augment(x: &Matrix, bias: f64) -> Matrix {
    let cols = x.cols() + 1;
    let mut data = Vec::with_capacity(x.rows() * cols);
    for i in 0..x.rows() {
        data.extend_from_slice(x.row(i));
        data.push(bias);
    }
    Matrix::new(x.rows(), cols, data).expect("augmented shape")
}

fn train_binary(x: &Matrix, y: &[f64], params: &SvmParams, rng: &mut Stream) -> BinarySvm {
    let n = x.rows();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; x.cols()];
    let q_diag: Vec<f64> = (0..n).map(|i| dot(x.row(i), x.row(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut dual_objective = Vec::new();
    let mut primal_objective = Vec::new();
    let mut epochs = 0;

    for _ in 0..params.max_epochs {
        epochs += 1;
        order.shuffle(rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            if q_diag[i] <= 0.0 {
                continue;
            }
            let row = x.row(i);
            let g = y[i] * dot(&w, row) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += step * xj;
                }
            }
        }

        let half_norm = 0.5 * dot(&w, &w);
        dual_objective.push(half_norm - alpha.iter().sum::<f64>());
        let hinge: f64 = (0..n).map(|i| (1.0 - y[i] * dot(&w, x.row(i))).max(0.0)).sum();
        primal_objective.push(half_norm + c * hinge);

        if pg_max - pg_min < params.tolerance {
            break;
        }
    }

    BinarySvm {
        weights: w,
        dual_objective,
        primal_objective,
        epochs,
    }
}
