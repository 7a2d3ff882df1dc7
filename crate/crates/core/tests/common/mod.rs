#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use spsa_fs::baselines::{Direction, Move};
use spsa_fs::data::{load_csv, CsvOptions};
use spsa_fs::objective::{evaluate, CachedObjective};
use spsa_fs::rng::stream;
use spsa_fs::{ClassifierKind, CvConfig, CvObjective, Dataset, FeatureMask, LossMeasurement, Objective, Result};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.csv"))
}

pub fn load(name: &str) -> Arc<Dataset> {
    Arc::new(load_csv(data_path(name), &CsvOptions::default()).expect("bundled dataset"))
}

/// Balanced two-class data where features `0..informative` are shifted by
/// ±`shift` with the class and the rest are standard normal noise.
pub fn shifted_gaussians(n: usize, p: usize, informative: usize, shift: f64, seed: u64) -> Dataset {
    let mut rng = stream(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&y| {
            (0..p)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    if j < informative {
                        z + if y == 1 { shift } else { -shift }
                    } else {
                        z
                    }
                })
                .collect()
        })
        .collect();
    Dataset::from_rows(&rows, &labels).expect("valid synthetic data")
}

/// Dataset of the scale test: n = 100, p = 5000, ten informative features.
pub fn scale_dataset(seed: u64) -> Dataset {
    shifted_gaussians(100, 5000, 10, 1.5, seed)
}

/// Cross-validation with the fold seed pinned, so every call on a mask
/// returns the same value.
pub struct PinnedCv {
    inner: CvObjective,
    seed: u64,
}

impl PinnedCv {
    pub fn new(data: Arc<Dataset>, kind: ClassifierKind, seed: u64) -> Self {
        Self {
            inner: CvObjective::new(data, kind, CvConfig::default()).expect("valid objective"),
            seed,
        }
    }
}

impl Objective for PinnedCv {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn measure(&self, mask: &FeatureMask, _seed: u64) -> Result<LossMeasurement> {
        self.inner.measure(mask, self.seed)
    }
}

/// Deterministic oracles used for the small-p equivalence checks.
pub fn deterministic_oracles() -> Vec<(String, Box<dyn Objective>)> {
    let mut out: Vec<(String, Box<dyn Objective>)> = Vec::new();
    for (p, informative, seed) in [(6, 2, 1), (8, 3, 2), (10, 3, 3)] {
        let data = Arc::new(shifted_gaussians(60, p, informative, 1.2, seed));
        out.push((
            format!("gauss-p{p}-1nn"),
            Box::new(CachedObjective::new(PinnedCv::new(
                data,
                ClassifierKind::NearestNeighbor,
                seed,
            ))),
        ));
    }
    out.push((
        "hamming-p10".into(),
        Box::new(hamming_oracle(&[1, 0, 1, 1, 0, 0, 1, 0, 0, 1])),
    ));
    out.push(("interaction-p8".into(), Box::new(interaction_oracle())));
    out
}

/// Loss = normalized Hamming distance to `target`, penalty 1 when empty.
pub fn hamming_oracle(target: &[u8]) -> impl Objective {
    let target = FeatureMask::from_ints(target);
    spsa_fs::objective::FnObjective::new(target.len(), move |m: &FeatureMask| {
        if m.is_none_selected() {
            1.0
        } else {
            m.hamming(&target) as f64 / target.len() as f64
        }
    })
}

/// Additive feature costs plus a pairwise synergy and a redundancy term.
pub fn interaction_oracle() -> impl Objective {
    spsa_fs::objective::FnObjective::new(8, |m: &FeatureMask| {
        if m.is_none_selected() {
            return 1.0;
        }
        let weights = [-0.08, -0.05, 0.03, -0.02, 0.04, 0.01, -0.03, 0.02];
        let mut loss = 0.5 + (0..8).filter(|&i| m.get(i)).map(|i| weights[i]).sum::<f64>();
        if m.get(2) && m.get(4) {
            loss -= 0.12;
        }
        if m.get(0) && m.get(1) {
            loss += 0.06;
        }
        loss
    })
}

/// Global minimum over all non-empty masks (first in enumeration order on ties)
/// and the set of all masks that attain it.
pub fn enumerate_optimum(objective: &dyn Objective) -> (f64, Vec<FeatureMask>) {
    let p = objective.dimension();
    assert!(p <= 16);
    let masks: Vec<FeatureMask> = (1u32..1 << p)
        .map(|b| FeatureMask::new((0..p).map(|i| b >> i & 1 == 1).collect()))
        .collect();
    let losses: Vec<f64> = masks
        .iter()
        .map(|m| evaluate(objective, m, 0).expect("oracle").loss())
        .collect();
    let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let argmins = masks
        .into_iter()
        .zip(losses)
        .filter(|(_, l)| *l == best)
        .map(|(m, _)| m)
        .collect();
    (best, argmins)
}

/// Plain re-implementation of greedy sequential selection, used as an
/// independent oracle for the library's accepted moves.
pub fn reference_sequential(objective: &dyn Objective, direction: Direction, floating: bool) -> Vec<Move> {
    let p = objective.dimension();
    let loss = |m: &FeatureMask| evaluate(objective, m, 0).expect("oracle").loss();
    let mut mask = match direction {
        Direction::Forward => FeatureMask::empty(p),
        Direction::Backward => FeatureMask::full(p),
    };
    let mut current = match direction {
        Direction::Forward => f64::INFINITY,
        Direction::Backward => loss(&mask),
    };
    let mut moves = Vec::new();

    // Best single flip among `candidates`, ties to the lowest index.
    let best_flip = |mask: &FeatureMask, candidates: &[usize]| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &i in candidates {
            let mut next = mask.clone();
            next.flip(i);
            let l = loss(&next);
            if best.is_none_or(|(_, b)| l < b) {
                best = Some((i, l));
            }
        }
        best
    };
    let additions = |mask: &FeatureMask, skip: Option<usize>| -> Vec<usize> {
        (0..p).filter(|&i| !mask.get(i) && Some(i) != skip).collect()
    };
    let removals = |mask: &FeatureMask, skip: Option<usize>| -> Vec<usize> {
        if mask.selected_count() < 2 {
            return Vec::new();
        }
        mask.selected_indices()
            .into_iter()
            .filter(|&i| Some(i) != skip)
            .collect()
    };

    loop {
        let candidates = match direction {
            Direction::Forward => additions(&mask, None),
            Direction::Backward => removals(&mask, None),
        };
        let Some((i, l)) = best_flip(&mask, &candidates) else {
            break;
        };
        if l >= current {
            break;
        }
        mask.flip(i);
        current = l;
        moves.push(match direction {
            Direction::Forward => Move::Add(i),
            Direction::Backward => Move::Remove(i),
        });
        if !floating {
            continue;
        }
        let mut last = i;
        loop {
            let candidates = match direction {
                Direction::Forward => removals(&mask, Some(last)),
                Direction::Backward => additions(&mask, Some(last)),
            };
            let Some((j, l)) = best_flip(&mask, &candidates) else {
                break;
            };
            if l >= current {
                break;
            }
            mask.flip(j);
            current = l;
            last = j;
            moves.push(match direction {
                Direction::Forward => Move::Remove(j),
                Direction::Backward => Move::Add(j),
            });
        }
    }
    moves
}
