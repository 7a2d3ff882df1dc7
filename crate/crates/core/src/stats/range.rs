use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::stream;

/// Draw count used when callers do not pick their own.
pub const DEFAULT_DRAWS: usize = 100_000;

/// Seed of the stream used for studentized-range simulation.
pub const DEFAULT_SEED: u64 = 0x0000_5eed_0f7a_b1e5;

/// Empirical studentized-range distribution for `k` means and `df` error
/// degrees of freedom, built by simulation.
#[derive(Clone, Debug)]
pub struct StudentizedRange {
    k: usize,
    df: f64,
    sorted: Vec<f64>,
}

impl StudentizedRange {
    pub fn simulate(k: usize, df: f64, draws: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!("studentized range needs k >= 2, got {k}")));
        }
        if !(df > 0.0 && df.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "degrees of freedom must be positive, got {df}"
            )));
        }
        if draws == 0 {
            return Err(Error::InvalidConfig("draws must be positive".into()));
        }
        let chi = ChiSquared::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut rng = stream(seed);
        let mut sorted: Vec<f64> = (0..draws)
            .map(|_| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for _ in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    lo = lo.min(z);
                    hi = hi.max(z);
                }
                let s = (chi.sample(&mut rng) / df).sqrt();
                (hi - lo) / s
            })
            .collect();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { k, df, sorted })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// Empirical quantile with linear interpolation between order statistics.
    pub fn quantile(&self, prob: f64) -> f64 {
        let n = self.sorted.len();
        let pos = prob.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = pos - lo as f64;
        self.sorted[lo] + frac * (self.sorted[hi] - self.sorted[lo])
    }

    /// Fraction of simulated values at or above `q`.
    pub fn survival(&self, q: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < q);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }
}

/// Upper `alpha` critical value of the studentized range.
pub fn studentized_range_quantile(k: usize, df: f64, alpha: f64, draws: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(StudentizedRange::simulate(k, df, draws, seed)?.quantile(1.0 - alpha))
}
