//! 1-nearest-neighbour classification under Euclidean distance.

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Width at which distances switch from the direct difference loop to the
/// blocked Gram-matrix formulation.
const GRAM_MIN_COLS: usize = 64;

/// Labels each query row with the label of its nearest training row.
/// Distance ties go to the lowest training-row index.
pub fn nn_predict(train_x: &Matrix, train_y: &[usize], query: &Matrix) -> Result<Vec<usize>> {
    if train_x.rows() == 0 {
        return Err(Error::Classifier("empty training partition".into()));
    }
    if train_x.cols() != query.cols() {
        return Err(Error::DimensionMismatch {
            expected: train_x.cols(),
            actual: query.cols(),
        });
    }
    let dist = squared_distances(query, train_x);
    let m = train_x.rows();
    Ok((0..query.rows())
        .map(|q| train_y[argmin(&dist[q * m..(q + 1) * m])])
        .collect())
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Row-major `query.rows() × train.rows()` matrix of squared distances.
pub fn squared_distances(query: &Matrix, train: &Matrix) -> Vec<f64> {
    if query.cols() >= GRAM_MIN_COLS {
        gram_distances(query, train)
    } else {
        direct_distances(query, train)
    }
}

pub(crate) fn direct_distances(query: &Matrix, train: &Matrix) -> Vec<f64> {
    let m = train.rows();
    let mut out = vec![0.0; query.rows() * m];
    for q in 0..query.rows() {
        let a = query.row(q);
        for (t, slot) in out[q * m..(q + 1) * m].iter_mut().enumerate() {
            *slot = a.iter().zip(train.row(t)).map(|(x, y)| (x - y) * (x - y)).sum();
        }
    }
    out
}

/// ‖a‖² + ‖b‖² − 2a·b with the cross term from a blocked GEMM.
pub(crate) fn gram_distances(query: &Matrix, train: &Matrix) -> Vec<f64> {
    let (nq, m, k) = (query.rows(), train.rows(), query.cols());
    let mut out = vec![0.0; nq * m];
    if nq == 0 || m == 0 {
        return out;
    }
    let norms = |mat: &Matrix| -> Vec<f64> {
        (0..mat.rows())
            .map(|i| mat.row(i).iter().map(|v| v * v).sum())
            .collect()
    };
    let qn = norms(query);
    let tn = norms(train);
    // out = -2 · Q · Tᵀ ; T is row-major m×k, read as k×m with strides (1, k).
    unsafe {
        matrixmultiply::dgemm(
            nq,
            k,
            m,
            -2.0,
            query.as_slice().as_ptr(),
            k as isize,
            1,
            train.as_slice().as_ptr(),
            1,
            k as isize,
            0.0,
            out.as_mut_ptr(),
            m as isize,
            1,
        );
    }
    for q in 0..nq {
        for (t, d) in out[q * m..(q + 1) * m].iter_mut().enumerate() {
            *d = (*d + qn[q] + tn[t]).max(0.0);
        }
    }
    out
}
