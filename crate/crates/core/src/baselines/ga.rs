//! Binary genetic algorithm over feature masks.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::objective::{evaluate, LossMeasurement, Objective};
use crate::rng::{stream, Stream};
use crate::spsa::{FsResult, Termination, TraceRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub stall_generations: usize,
    pub elite_count: usize,
    pub tournament_size: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub master_seed: u64,
}

impl GaConfig {
    /// Profile for datasets with fewer than 100 features.
    pub fn small() -> Self {
        Self {
            population_size: 30,
            max_generations: 100,
            stall_generations: 25,
            elite_count: 2,
            tournament_size: 2,
            mutation_prob: 0.1,
            crossover_prob: 0.8,
            master_seed: 0,
        }
    }

    pub fn large() -> Self {
        Self {
            population_size: 45,
            max_generations: 200,
            stall_generations: 50,
            ..Self::small()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::InvalidConfig(format!(
                "elite_count ({}) must be below population_size ({})",
                self.elite_count, self.population_size
            )));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidConfig("tournament_size must be positive".into()));
        }
        if self.max_generations == 0 || self.stall_generations == 0 {
            return Err(Error::InvalidConfig(
                "max_generations and stall_generations must be positive".into(),
            ));
        }
        for (name, p) in [
            ("mutation_prob", self.mutation_prob),
            ("crossover_prob", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    /// Upper bound on oracle calls.
    pub fn evaluation_budget(&self) -> usize {
        self.population_size * (self.max_generations + 1)
    }
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::small()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome {
    pub bits: FeatureMask,
    pub fitness: Option<LossMeasurement>,
}

impl Chromosome {
    pub fn new(bits: FeatureMask) -> Self {
        Self { bits, fitness: None }
    }

    /// Loss of an evaluated chromosome; unevaluated ones rank last.
    pub fn loss(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::INFINITY, LossMeasurement::loss)
    }
}

/// Draws `size` members with replacement and returns the fittest.
/// Ties go to the lowest population index.
pub fn tournament_select<'p, R: Rng + ?Sized>(
    population: &'p [Chromosome],
    size: usize,
    rng: &mut R,
) -> &'p Chromosome {
    let mut best = rng.random_range(0..population.len());
    for _ in 1..size {
        let i = rng.random_range(0..population.len());
        let (li, lb) = (population[i].loss(), population[best].loss());
        if li < lb || (li == lb && i < best) {
            best = i;
        }
    }
    &population[best]
}

/// Child bits = a XOR b.
pub fn crossover_xor(a: &Chromosome, b: &Chromosome) -> Result<Chromosome> {
    Ok(Chromosome::new(a.bits.xor(&b.bits)?))
}

/// Flips each bit independently with probability `prob`.
pub fn mutate_bits<R: Rng + ?Sized>(c: &Chromosome, prob: f64, rng: &mut R) -> Chromosome {
    let mut bits = c.bits.clone();
    for i in 0..bits.len() {
        if rng.random::<f64>() < prob {
            bits.flip(i);
        }
    }
    Chromosome::new(bits)
}

/// Random initial population of i.i.d. fair bits.
pub fn random_population(p: usize, size: usize, rng: &mut Stream) -> Vec<FeatureMask> {
    (0..size)
        .map(|_| FeatureMask::new((0..p).map(|_| rng.random::<bool>()).collect()))
        .collect()
}

pub fn run_bga<O: Objective + ?Sized>(objective: &O, cfg: &GaConfig) -> Result<FsResult> {
    cfg.validate()?;
    let p = objective.dimension();
    if p == 0 {
        return Err(Error::InvalidDimension("objective has no features".into()));
    }
    let mut rng = stream(cfg.master_seed);
    let initial = random_population(p, cfg.population_size, &mut rng);
    evolve(objective, cfg, initial, rng)
}

/// Runs the GA from a caller-supplied initial population.
pub fn run_bga_from<O: Objective + ?Sized>(
    objective: &O,
    cfg: &GaConfig,
    initial: Vec<FeatureMask>,
) -> Result<FsResult> {
    cfg.validate()?;
    if initial.len() != cfg.population_size {
        return Err(Error::InvalidConfig(format!(
            "initial population has {} members, expected {}",
            initial.len(),
            cfg.population_size
        )));
    }
    evolve(objective, cfg, initial, stream(cfg.master_seed))
}

fn evaluate_pending<O: Objective + ?Sized>(
    objective: &O,
    population: &mut [Chromosome],
    rng: &mut Stream,
) -> Result<usize> {
    // Seeds are drawn serially so results do not depend on scheduling.
    let jobs: Vec<(usize, u64)> = population
        .iter()
        .enumerate()
        .filter(|(_, c)| c.fitness.is_none())
        .map(|(i, _)| (i, rng.next_u64()))
        .collect();
    let measured = jobs
        .par_iter()
        .map(|&(i, seed)| evaluate(objective, &population[i].bits, seed).map(|m| (i, m)))
        .collect::<Result<Vec<_>>>()?;
    let count = measured.len();
    for (i, m) in measured {
        population[i].fitness = Some(m);
    }
    Ok(count)
}

/// Population indices ordered by loss, ties by index.
fn ranked(population: &[Chromosome]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[a].loss().total_cmp(&population[b].loss()).then(a.cmp(&b)));
    order
}

fn evolve<O: Objective + ?Sized>(
    objective: &O,
    cfg: &GaConfig,
    initial: Vec<FeatureMask>,
    mut rng: Stream,
) -> Result<FsResult> {
    let p = objective.dimension();
    if let Some(bad) = initial.iter().find(|m| m.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: bad.len(),
        });
    }
    let mut population: Vec<Chromosome> = initial.into_iter().map(Chromosome::new).collect();
    let mut evaluations = evaluate_pending(objective, &mut population, &mut rng)?;

    let mut best: Option<LossMeasurement> = None;
    let mut trace = Vec::new();
    let mut since_improvement = 0;
    let mut generation = 0;

    let mut record = |population: &[Chromosome], generation: usize, best: &mut Option<LossMeasurement>| -> bool {
        let leader = &population[ranked(population)[0]];
        let improved = best.as_ref().is_none_or(|b| leader.loss() < b.loss());
        if improved {
            *best = leader.fitness.clone();
        }
        let best_loss = best.as_ref().map_or(f64::INFINITY, LossMeasurement::loss);
        trace.push(TraceRow {
            iteration: generation,
            y_plus: None,
            y_minus: None,
            y_iterate: Some(leader.loss()),
            best_so_far: best_loss,
            selected_count: leader.bits.selected_count(),
        });
        improved
    };
    record(&population, 0, &mut best);

    let termination = loop {
        if generation >= cfg.max_generations {
            break Termination::MaxIterations;
        }
        if since_improvement >= cfg.stall_generations {
            break Termination::Stalled;
        }
        generation += 1;

        let order = ranked(&population);
        let mut next: Vec<Chromosome> = order[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let winner = tournament_select(&population, cfg.tournament_size, &mut rng);
            let child = if rng.random::<f64>() < cfg.crossover_prob {
                let mate = tournament_select(&population, cfg.tournament_size, &mut rng);
                crossover_xor(winner, mate)?
            } else {
                Chromosome::new(winner.bits.clone())
            };
            next.push(mutate_bits(&child, cfg.mutation_prob, &mut rng));
        }
        population = next;
        evaluations += evaluate_pending(objective, &mut population, &mut rng)?;

        if record(&population, generation, &mut best) {
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
    };

    let best = best.ok_or_else(|| Error::Contract("no chromosome was evaluated".into()))?;
    Ok(FsResult {
        best_mask: best.mask.clone(),
        best_measurement: best,
        evaluations,
        iterations: generation,
        trace,
        termination,
    })
}
