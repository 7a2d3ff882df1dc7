//! Greedy sequential selection: SFS, SBS and their floating variants.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::objective::{evaluate, LossMeasurement, Objective};
use crate::rng::stream;
use crate::spsa::{FsResult, Termination, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialConfig {
    pub direction: Direction,
    pub floating: bool,
    pub master_seed: u64,
    /// Stops the search once this many oracle calls have been made.
    pub max_evaluations: Option<usize>,
}

impl SequentialConfig {
    pub fn new(direction: Direction, floating: bool) -> Self {
        Self {
            direction,
            floating,
            master_seed: 0,
            max_evaluations: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "feature", rename_all = "snake_case")]
pub enum Move {
    Add(usize),
    Remove(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptedMove {
    pub step: Move,
    pub loss: f64,
    /// True for removals (forward) or additions (backward) made by a floating pass.
    pub conditional: bool,
}

#[derive(Clone, Debug)]
pub struct SequentialResult {
    pub result: FsResult,
    pub moves: Vec<AcceptedMove>,
}

struct Search<'o, O: ?Sized> {
    objective: &'o O,
    rng: crate::rng::Stream,
    mask: FeatureMask,
    incumbent: Option<LossMeasurement>,
    evaluations: usize,
    max_evaluations: usize,
    moves: Vec<AcceptedMove>,
    trace: Vec<TraceRow>,
}

impl<O: Objective + ?Sized> Search<'_, O> {
    fn incumbent_loss(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, LossMeasurement::loss)
    }

    fn budget_left(&self) -> bool {
        self.evaluations < self.max_evaluations
    }

    /// Evaluates every candidate move and applies the best one if it strictly
    /// improves on the incumbent. Returns whether a move was applied.
    fn try_moves(&mut self, candidates: Vec<Move>, conditional: bool) -> Result<bool> {
        if candidates.is_empty() || !self.budget_left() {
            return Ok(false);
        }
        let room = self.max_evaluations - self.evaluations;
        let candidates = &candidates[..candidates.len().min(room)];
        let jobs: Vec<(Move, FeatureMask, u64)> = candidates
            .iter()
            .map(|&m| {
                let mut next = self.mask.clone();
                match m {
                    Move::Add(i) | Move::Remove(i) => next.flip(i),
                }
                (m, next, self.rng.next_u64())
            })
            .collect();
        let objective = self.objective;
        let measured = jobs
            .par_iter()
            .map(|(_, mask, seed)| evaluate(objective, mask, *seed))
            .collect::<Result<Vec<_>>>()?;
        self.evaluations += measured.len();

        // Candidates are in ascending feature order, so the first minimum wins ties.
        let (best, m) = measured
            .into_iter()
            .enumerate()
            .reduce(|acc, cur| if cur.1.loss() < acc.1.loss() { cur } else { acc })
            .expect("non-empty candidate list");
        if m.loss() >= self.incumbent_loss() {
            return Ok(false);
        }
        self.mask = jobs[best].1.clone();
        self.moves.push(AcceptedMove {
            step: jobs[best].0,
            loss: m.loss(),
            conditional,
        });
        self.trace.push(TraceRow {
            iteration: self.moves.len(),
            y_plus: None,
            y_minus: None,
            y_iterate: Some(m.loss()),
            best_so_far: m.loss(),
            selected_count: self.mask.selected_count(),
        });
        self.incumbent = Some(m);
        Ok(true)
    }

    fn additions(&self, exclude: Option<usize>) -> Vec<Move> {
        (0..self.mask.len())
            .filter(|&i| !self.mask.get(i) && Some(i) != exclude)
            .map(Move::Add)
            .collect()
    }

    fn removals(&self, exclude: Option<usize>) -> Vec<Move> {
        if self.mask.selected_count() <= 1 {
            return Vec::new();
        }
        self.mask
            .selected_indices()
            .into_iter()
            .filter(|&i| Some(i) != exclude)
            .map(Move::Remove)
            .collect()
    }

    fn last_feature(&self) -> Option<usize> {
        self.moves.last().map(|m| match m.step {
            Move::Add(i) | Move::Remove(i) => i,
        })
    }
}

pub fn run_sequential<O: Objective + ?Sized>(objective: &O, cfg: &SequentialConfig) -> Result<SequentialResult> {
    let p = objective.dimension();
    if p == 0 {
        return Err(Error::InvalidDimension("objective has no features".into()));
    }
    let mut search = Search {
        objective,
        rng: stream(cfg.master_seed),
        mask: match cfg.direction {
            Direction::Forward => FeatureMask::empty(p),
            Direction::Backward => FeatureMask::full(p),
        },
        incumbent: None,
        evaluations: 0,
        max_evaluations: cfg.max_evaluations.unwrap_or(usize::MAX),
        moves: Vec::new(),
        trace: Vec::new(),
    };

    if cfg.direction == Direction::Backward {
        if !search.budget_left() {
            return Err(Error::InvalidConfig("max_evaluations must be positive".into()));
        }
        let seed = search.rng.next_u64();
        let full = evaluate(objective, &search.mask, seed)?;
        search.evaluations += 1;
        search.trace.push(TraceRow {
            iteration: 0,
            y_plus: None,
            y_minus: None,
            y_iterate: Some(full.loss()),
            best_so_far: full.loss(),
            selected_count: p,
        });
        search.incumbent = Some(full);
    }

    loop {
        let primary = match cfg.direction {
            Direction::Forward => search.additions(None),
            Direction::Backward => search.removals(None),
        };
        if !search.try_moves(primary, false)? {
            break;
        }
        if cfg.floating {
            loop {
                let just_changed = search.last_feature();
                let conditional = match cfg.direction {
                    Direction::Forward => search.removals(just_changed),
                    Direction::Backward => search.additions(just_changed),
                };
                if !search.try_moves(conditional, true)? {
                    break;
                }
            }
        }
    }

    let termination = if search.budget_left() {
        Termination::NoImprovement
    } else {
        Termination::EvaluationBudget
    };
    let best = search
        .incumbent
        .ok_or_else(|| Error::Contract("sequential search accepted no move".into()))?;
    Ok(SequentialResult {
        result: FsResult {
            best_mask: best.mask.clone(),
            best_measurement: best,
            evaluations: search.evaluations,
            iterations: search.moves.len(),
            trace: search.trace,
            termination,
        },
        moves: search.moves,
    })
}
