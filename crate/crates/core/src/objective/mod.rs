//! Noisy loss oracles over feature masks.
//!
//! A measurement is y = L + ε: each call draws fresh cross-validation noise
//! from the seed it is handed, so repeated calls on the same mask differ.

mod auc;
mod cv;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;

pub use auc::auc_from_scores;
pub use cv::{make_folds, make_stratified_folds, CvConfig, CvObjective, FoldAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    ErrorRate,
    Auc,
}

impl Metric {
    /// Converts a reported value to a loss to minimize.
    pub fn loss_of(self, value: f64) -> f64 {
        match self {
            Metric::ErrorRate => value,
            Metric::Auc => 1.0 - value,
        }
    }

    /// Reported value assigned to a mask that selects nothing.
    pub fn penalty_value(self) -> f64 {
        match self {
            Metric::ErrorRate => 1.0,
            Metric::Auc => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::ErrorRate => "error_rate",
            Metric::Auc => "auc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error_rate" | "error" => Ok(Metric::ErrorRate),
            "auc" => Ok(Metric::Auc),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

/// Mean and dispersion of repeated measurements of one mask.
///
/// `mean` and `per_repetition` are in the metric's own orientation (error
/// rate, or AUC); use [`LossMeasurement::loss`] for the minimization target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossMeasurement {
    pub metric: Metric,
    pub mean: f64,
    pub std_error: f64,
    pub per_repetition: Vec<f64>,
    pub mask: FeatureMask,
}

impl LossMeasurement {
    pub fn from_repetitions(metric: Metric, mask: FeatureMask, per_repetition: Vec<f64>) -> Self {
        let r = per_repetition.len();
        let mean = per_repetition.iter().sum::<f64>() / r as f64;
        let std_error = if r > 1 {
            let var = per_repetition.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        Self {
            metric,
            mean,
            std_error,
            per_repetition,
            mask,
        }
    }

    /// Penalty measurement for an all-zero mask.
    pub fn penalty(metric: Metric, mask: FeatureMask, repetitions: usize) -> Self {
        Self::from_repetitions(metric, mask, vec![metric.penalty_value(); repetitions.max(1)])
    }

    pub fn loss(&self) -> f64 {
        self.metric.loss_of(self.mean)
    }

    /// Per-repetition losses, oriented for minimization.
    pub fn losses(&self) -> Vec<f64> {
        self.per_repetition.iter().map(|&v| self.metric.loss_of(v)).collect()
    }
}

/// A mask → measurement oracle.
///
/// `seed` determines all randomness of one call; implementations must be
/// safe to call concurrently on distinct masks.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;

    fn metric(&self) -> Metric {
        Metric::ErrorRate
    }

    fn measure(&self, mask: &FeatureMask, seed: u64) -> Result<LossMeasurement>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn metric(&self) -> Metric {
        (**self).metric()
    }

    fn measure(&self, mask: &FeatureMask, seed: u64) -> Result<LossMeasurement> {
        (**self).measure(mask, seed)
    }
}

/// Calls the oracle, attaching the offending mask to any failure.
pub fn evaluate<O: Objective + ?Sized>(objective: &O, mask: &FeatureMask, seed: u64) -> Result<LossMeasurement> {
    if mask.len() != objective.dimension() {
        return Err(Error::DimensionMismatch {
            expected: objective.dimension(),
            actual: mask.len(),
        });
    }
    objective.measure(mask, seed).map_err(|e| Error::Objective {
        mask: mask.to_string(),
        source: Box::new(e),
    })
}

/// Deterministic oracle from a closure returning the loss of a mask.
pub struct FnObjective<F> {
    p: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&FeatureMask) -> f64 + Sync,
{
    pub fn new(p: usize, f: F) -> Self {
        Self { p, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&FeatureMask) -> f64 + Sync,
{
    fn dimension(&self) -> usize {
        self.p
    }

    fn measure(&self, mask: &FeatureMask, _seed: u64) -> Result<LossMeasurement> {
        Ok(LossMeasurement::from_repetitions(
            Metric::ErrorRate,
            mask.clone(),
            vec![(self.f)(mask)],
        ))
    }
}

/// Memoizes an oracle by mask. Only sound for deterministic oracles: a cached
/// stochastic oracle stops drawing fresh noise.
pub struct CachedObjective<O> {
    inner: O,
    cache: Mutex<HashMap<FeatureMask, LossMeasurement>>,
    misses: AtomicUsize,
}

impl<O: Objective> CachedObjective<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
            misses: AtomicUsize::new(0),
        }
    }

    /// Number of calls forwarded to the wrapped oracle.
    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl<O: Objective> Objective for CachedObjective<O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn metric(&self) -> Metric {
        self.inner.metric()
    }

    fn measure(&self, mask: &FeatureMask, seed: u64) -> Result<LossMeasurement> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(mask) {
            return Ok(hit.clone());
        }
        let m = self.inner.measure(mask, seed)?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().expect("cache lock").insert(mask.clone(), m.clone());
        Ok(m)
    }
}
