//! Comparison of methods from per-repetition samples: standard errors,
//! Bartlett's test, classic and Welch one-way ANOVA, and pairwise
//! studentized-range tests.

mod range;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

pub use range::{studentized_range_quantile, StudentizedRange, DEFAULT_DRAWS, DEFAULT_SEED};

pub const ALPHA: f64 = 0.05;

/// Sample mean and its standard error (sample sd over √n).
pub fn mean_se(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "standard error needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    Ok((mean, (variance(samples, mean) / n).sqrt()))
}

fn variance(samples: &[f64], mean: f64) -> f64 {
    samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub values: Vec<f64>,
}

/// Named groups of samples; at least two groups of at least two values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSamples {
    groups: Vec<Group>,
}

struct Summary {
    n: f64,
    mean: f64,
    var: f64,
}

impl GroupSamples {
    pub fn new(groups: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least 2 groups, got {}",
                groups.len()
            )));
        }
        for (name, values) in &groups {
            if values.len() < 2 {
                return Err(Error::InvalidDimension(format!(
                    "group {name:?} has {} samples, need at least 2",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDimension(format!(
                    "group {name:?} has a non-finite sample"
                )));
            }
        }
        Ok(Self {
            groups: groups
                .into_iter()
                .map(|(name, values)| Group { name, values })
                .collect(),
        })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.summaries().iter().map(|s| s.mean).collect()
    }

    fn summaries(&self) -> Vec<Summary> {
        self.groups
            .iter()
            .map(|g| {
                let n = g.values.len() as f64;
                let mean = g.values.iter().sum::<f64>() / n;
                Summary {
                    n,
                    mean,
                    var: variance(&g.values, mean),
                }
            })
            .collect()
    }

    fn total(&self) -> f64 {
        self.groups.iter().map(|g| g.values.len() as f64).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df1: f64,
    /// Denominator degrees of freedom; zero for chi-square tests.
    pub df2: f64,
    pub p_value: f64,
}

fn chi_square_sf(x: f64, df: f64) -> Result<f64> {
    let d = ChiSquared::new(df).map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok(d.sf(x).clamp(0.0, 1.0))
}

fn f_sf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    let d = FisherSnedecor::new(df1, df2).map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok(d.sf(x).clamp(0.0, 1.0))
}

/// Bartlett's test of equal variances.
pub fn bartlett(groups: &GroupSamples) -> Result<TestResult> {
    let s = groups.summaries();
    if let Some((g, _)) = groups.groups.iter().zip(&s).find(|(_, s)| s.var <= 0.0) {
        return Err(Error::Degenerate(format!("group {:?} has zero variance", g.name)));
    }
    let k = s.len() as f64;
    let dof = groups.total() - k;
    let pooled = s.iter().map(|g| (g.n - 1.0) * g.var).sum::<f64>() / dof;
    let numerator = dof * pooled.ln() - s.iter().map(|g| (g.n - 1.0) * g.var.ln()).sum::<f64>();
    let correction = 1.0 + (s.iter().map(|g| 1.0 / (g.n - 1.0)).sum::<f64>() - 1.0 / dof) / (3.0 * (k - 1.0));
    // Round-off can push an exact zero slightly negative.
    let statistic = (numerator / correction).max(0.0);
    Ok(TestResult {
        statistic,
        df1: k - 1.0,
        df2: 0.0,
        p_value: chi_square_sf(statistic, k - 1.0)?,
    })
}

/// Classic one-way ANOVA.
pub fn anova_oneway(groups: &GroupSamples) -> Result<TestResult> {
    let s = groups.summaries();
    let n = groups.total();
    let k = s.len() as f64;
    let grand = s.iter().map(|g| g.n * g.mean).sum::<f64>() / n;
    let ssb = s.iter().map(|g| g.n * (g.mean - grand).powi(2)).sum::<f64>();
    let ssw = s.iter().map(|g| (g.n - 1.0) * g.var).sum::<f64>();
    if ssw <= 0.0 {
        return Err(Error::Degenerate("zero within-group variance".into()));
    }
    let (df1, df2) = (k - 1.0, n - k);
    let f = (ssb / df1) / (ssw / df2);
    Ok(TestResult {
        statistic: f,
        df1,
        df2,
        p_value: f_sf(f, df1, df2)?,
    })
}

/// Welch's heteroscedastic one-way ANOVA.
pub fn welch_anova(groups: &GroupSamples) -> Result<TestResult> {
    let s = groups.summaries();
    if let Some((g, _)) = groups.groups.iter().zip(&s).find(|(_, s)| s.var <= 0.0) {
        return Err(Error::Degenerate(format!("group {:?} has zero variance", g.name)));
    }
    let k = s.len() as f64;
    let weights: Vec<f64> = s.iter().map(|g| g.n / g.var).collect();
    let total_w: f64 = weights.iter().sum();
    let centre = weights.iter().zip(&s).map(|(w, g)| w * g.mean).sum::<f64>() / total_w;
    let between = weights
        .iter()
        .zip(&s)
        .map(|(w, g)| w * (g.mean - centre).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    let lambda = weights
        .iter()
        .zip(&s)
        .map(|(w, g)| (1.0 - w / total_w).powi(2) / (g.n - 1.0))
        .sum::<f64>();
    let f = between / (1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lambda);
    let df2 = (k * k - 1.0) / (3.0 * lambda);
    Ok(TestResult {
        statistic: f,
        df1: k - 1.0,
        df2,
        p_value: f_sf(f, k - 1.0, df2)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub first: usize,
    pub second: usize,
    /// Mean of `first` minus mean of `second`.
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
    pub q: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant: bool,
}

fn pair_test(
    first: usize,
    second: usize,
    difference: f64,
    se: f64,
    dist: &StudentizedRange,
    alpha: f64,
) -> PairwiseComparison {
    let critical = dist.quantile(1.0 - alpha);
    let q = difference.abs() / se;
    PairwiseComparison {
        first,
        second,
        difference,
        lower: difference - critical * se,
        upper: difference + critical * se,
        q,
        df: dist.df(),
        p_value: dist.survival(q),
        significant: q > critical,
    }
}

/// Tukey–Kramer all-pairs comparisons using the pooled within-group variance.
pub fn tukey_hsd(groups: &GroupSamples, alpha: f64, seed: u64) -> Result<Vec<PairwiseComparison>> {
    let s = groups.summaries();
    let df = groups.total() - s.len() as f64;
    let mse = s.iter().map(|g| (g.n - 1.0) * g.var).sum::<f64>() / df;
    if mse <= 0.0 {
        return Err(Error::Degenerate("zero within-group variance".into()));
    }
    let dist = StudentizedRange::simulate(s.len(), df, DEFAULT_DRAWS, seed)?;
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let se = (mse / 2.0 * (1.0 / s[i].n + 1.0 / s[j].n)).sqrt();
            out.push(pair_test(i, j, s[i].mean - s[j].mean, se, &dist, alpha));
        }
    }
    Ok(out)
}

/// Games–Howell comparisons: per-pair Welch standard errors and degrees of
/// freedom against the studentized range.
pub fn games_howell(groups: &GroupSamples, alpha: f64, seed: u64) -> Result<Vec<PairwiseComparison>> {
    let s = groups.summaries();
    if let Some((g, _)) = groups.groups.iter().zip(&s).find(|(_, s)| s.var <= 0.0) {
        return Err(Error::Degenerate(format!("group {:?} has zero variance", g.name)));
    }
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let (vi, vj) = (s[i].var / s[i].n, s[j].var / s[j].n);
            let df = (vi + vj).powi(2) / (vi * vi / (s[i].n - 1.0) + vj * vj / (s[j].n - 1.0));
            let dist = StudentizedRange::simulate(s.len(), df, DEFAULT_DRAWS, seed)?;
            let se = ((vi + vj) / 2.0).sqrt();
            out.push(pair_test(i, j, s[i].mean - s[j].mean, se, &dist, alpha));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnovaVariant {
    Classic,
    Welch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub groups: Vec<String>,
    pub means: Vec<f64>,
    pub bartlett_statistic: f64,
    pub bartlett_p: f64,
    pub anova_variant: AnovaVariant,
    pub anova_f: f64,
    pub anova_p: f64,
    pub pairwise: Vec<PairwiseComparison>,
    pub best_group: Option<String>,
}

impl ComparisonReport {
    /// Symmetric significance flags; the diagonal is false.
    pub fn significance_matrix(&self) -> Vec<Vec<bool>> {
        let k = self.groups.len();
        let mut m = vec![vec![false; k]; k];
        for pair in &self.pairwise {
            m[pair.first][pair.second] = pair.significant;
            m[pair.second][pair.first] = pair.significant;
        }
        m
    }
}

/// Runs the full protocol on losses (lower is better).
///
/// Unequal variances (Bartlett p < `alpha`) switch to Welch ANOVA with
/// Games–Howell pairs. A group is reported best when the ANOVA rejects, it has
/// the smallest mean, and every pair involving it is significant.
pub fn compare(groups: &GroupSamples, alpha: f64, seed: u64) -> Result<ComparisonReport> {
    let b = bartlett(groups)?;
    let variant = if b.p_value < alpha {
        AnovaVariant::Welch
    } else {
        AnovaVariant::Classic
    };
    let (anova, pairwise) = match variant {
        AnovaVariant::Classic => (anova_oneway(groups)?, tukey_hsd(groups, alpha, seed)?),
        AnovaVariant::Welch => (welch_anova(groups)?, games_howell(groups, alpha, seed)?),
    };
    let means = groups.means();
    let leader = (0..means.len())
        .min_by(|&a, &b| means[a].total_cmp(&means[b]))
        .expect("at least two groups");
    let unique_leader = means.iter().enumerate().all(|(i, &m)| i == leader || m > means[leader]);
    let dominates = pairwise
        .iter()
        .filter(|p| p.first == leader || p.second == leader)
        .all(|p| p.significant);
    let best_group = (anova.p_value < alpha && unique_leader && dominates).then(|| groups.groups[leader].name.clone());
    Ok(ComparisonReport {
        groups: groups.groups.iter().map(|g| g.name.clone()).collect(),
        means,
        bartlett_statistic: b.statistic,
        bartlett_p: b.p_value,
        anova_variant: variant,
        anova_f: anova.statistic,
        anova_p: anova.p_value,
        pairwise,
        best_group,
    })
}
