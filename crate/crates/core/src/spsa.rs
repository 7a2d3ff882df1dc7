//! Simultaneous perturbation stochastic approximation over feature masks.
//!
//! Each iteration perturbs every component of the probe vector at once by
//! ±c, bounds and rounds both perturbed points to masks, and estimates the
//! whole gradient from the two loss measurements:
//!
//! ```text
//! ĝ_k = (y(R(B(ŵ + c_k Δ))) − y(R(B(ŵ − c_k Δ)))) / (2 c_k) · Δ⁻¹
//! ŵ_{k+1} = ŵ_k − a_k ĝ_k
//! ```
//!
//! A third measurement at the rounded new iterate feeds best-so-far tracking
//! and stall detection only.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::objective::{evaluate, LossMeasurement, Objective};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpsaMode {
    /// Constant perturbation size; the iterate is kept inside [0,1].
    Binary,
    /// Decaying perturbation size c/k^γ; the iterate is left unbounded.
    Continuous,
}

/// Step-size and perturbation-size sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub a: f64,
    /// Stability constant.
    pub big_a: f64,
    pub alpha: f64,
    pub c: f64,
    /// Ignored in binary mode.
    pub gamma: f64,
    pub mode: SpsaMode,
}

impl GainSchedule {
    pub fn new(a: f64, big_a: f64, alpha: f64, c: f64, gamma: f64, mode: SpsaMode) -> Result<Self> {
        let s = Self {
            a,
            big_a,
            alpha,
            c,
            gamma,
            mode,
        };
        s.validate()?;
        Ok(s)
    }

    /// Binary defaults for datasets with fewer than 100 features.
    pub fn binary_small() -> Self {
        Self {
            a: 0.75,
            big_a: 100.0,
            alpha: 0.6,
            c: 0.05,
            gamma: 0.0,
            mode: SpsaMode::Binary,
        }
    }

    /// Binary defaults for datasets with 100 or more features.
    pub fn binary_large() -> Self {
        Self {
            a: 1.5,
            big_a: 300.0,
            ..Self::binary_small()
        }
    }

    /// Continuous-mode defaults (same for both dataset sizes).
    pub fn continuous() -> Self {
        Self {
            a: 0.75,
            big_a: 0.0,
            alpha: 0.6,
            c: 0.01,
            gamma: 0.1,
            mode: SpsaMode::Continuous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.big_a, self.alpha, self.c, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGain("gain parameters must be finite".into()));
        }
        if self.a <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidGain(format!(
                "a and c must be positive (a = {}, c = {})",
                self.a, self.c
            )));
        }
        if self.big_a < 0.0 {
            return Err(Error::InvalidGain(format!(
                "stability constant must be non-negative, got {}",
                self.big_a
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidGain(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidGain(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Step size a/(A+k)^α. Iterations are counted from k = 1.
    pub fn gain_a(&self, k: usize) -> f64 {
        self.a / (self.big_a + k as f64).powf(self.alpha)
    }

    /// Perturbation size: c in binary mode, c/k^γ in continuous mode.
    pub fn gain_c(&self, k: usize) -> f64 {
        match self.mode {
            SpsaMode::Binary => self.c,
            SpsaMode::Continuous => self.c / (k as f64).powf(self.gamma),
        }
    }
}

/// Continuous iterate over the p features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeVector(pub Vec<f64>);

impl ProbeVector {
    pub fn constant(p: usize, value: f64) -> Self {
        Self(vec![value; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// ±1 perturbation directions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationVector(Vec<i8>);

impl PerturbationVector {
    pub fn new(components: Vec<i8>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|&&d| d != 1 && d != -1) {
            return Err(Error::Contract(format!(
                "perturbation components must be ±1, got {bad}"
            )));
        }
        Ok(Self(components))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[i8] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate(pub Vec<f64>);

impl GradientEstimate {
    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// Symmetric Bernoulli ±1 vector of length `p`.
pub fn sample_perturbation<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<PerturbationVector> {
    if p == 0 {
        return Err(Error::InvalidDimension("perturbation needs p >= 1".into()));
    }
    Ok(PerturbationVector(
        (0..p).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
    ))
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Returns (w + c·Δ, w − c·Δ).
pub fn perturb(w: &ProbeVector, ck: f64, delta: &PerturbationVector) -> Result<(ProbeVector, ProbeVector)> {
    check_len(w.len(), delta.len())?;
    let (plus, minus) =
        w.0.iter()
            .zip(&delta.0)
            .map(|(&wi, &di)| {
                let step = ck * f64::from(di);
                (wi + step, wi - step)
            })
            .unzip();
    Ok((ProbeVector(plus), ProbeVector(minus)))
}

/// Clamps every component into [0, 1].
pub fn bound(w: &ProbeVector) -> ProbeVector {
    ProbeVector(w.0.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Component i is selected iff w_i ≥ 0.5.
pub fn round_mask(w: &ProbeVector) -> Result<FeatureMask> {
    w.0.iter()
        .map(|&v| {
            if (0.0..=1.0).contains(&v) {
                Ok(v >= 0.5)
            } else {
                Err(Error::Contract(format!("cannot round component {v} outside [0, 1]")))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(FeatureMask::new)
}

/// (y⁺ − y⁻)/(2c) · Δ⁻¹, where Δ_i⁻¹ = Δ_i for ±1 entries.
pub fn estimate_gradient(y_plus: f64, y_minus: f64, ck: f64, delta: &PerturbationVector) -> Result<GradientEstimate> {
    if ck <= 0.0 || !ck.is_finite() {
        return Err(Error::InvalidGain(format!(
            "perturbation size must be positive, got {ck}"
        )));
    }
    let scale = (y_plus - y_minus) / (2.0 * ck);
    Ok(GradientEstimate(
        delta.0.iter().map(|&d| scale * f64::from(d)).collect(),
    ))
}

/// Returns w − a·g.
pub fn update(w: &ProbeVector, ak: f64, g: &GradientEstimate) -> Result<ProbeVector> {
    check_len(w.len(), g.0.len())?;
    Ok(ProbeVector(w.0.iter().zip(&g.0).map(|(wi, gi)| wi - ak * gi).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_iterations: usize,
    /// Stop after this fraction of `max_iterations` passes without improvement.
    pub stall_fraction: f64,
    pub master_seed: u64,
    pub initial_component: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            stall_fraction: 0.25,
            master_seed: 0,
            initial_component: 0.5,
        }
    }
}

impl RunConfig {
    pub fn stall_limit(&self) -> usize {
        (self.stall_fraction * self.max_iterations as f64).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.stall_fraction > 0.0 && self.stall_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stall_fraction must lie in (0, 1], got {}",
                self.stall_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.initial_component) {
            return Err(Error::InvalidConfig(format!(
                "initial_component must lie in [0, 1], got {}",
                self.initial_component
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Stalled,
    /// A greedy search found no improving move.
    NoImprovement,
    /// A greedy search hit its evaluation budget.
    EvaluationBudget,
    /// Fixed mask; one measurement only.
    SingleEvaluation,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::MaxIterations => "max_iterations",
            Termination::Stalled => "stalled",
            Termination::NoImprovement => "no_improvement",
            Termination::EvaluationBudget => "evaluation_budget",
            Termination::SingleEvaluation => "single_evaluation",
        }
    }
}

/// One row of a search trace. Losses are oriented for minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub y_plus: Option<f64>,
    pub y_minus: Option<f64>,
    pub y_iterate: Option<f64>,
    pub best_so_far: f64,
    pub selected_count: usize,
}

/// Outcome of a feature-selection search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsResult {
    pub best_mask: FeatureMask,
    pub best_measurement: LossMeasurement,
    /// Number of oracle calls made.
    pub evaluations: usize,
    /// Iterations (or generations, or accepted moves) executed.
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
}

/// Everything computed in one iteration, for inspection and tests.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub iteration: usize,
    pub delta: PerturbationVector,
    pub gain_a: f64,
    pub gain_c: f64,
    pub plus_mask: FeatureMask,
    pub minus_mask: FeatureMask,
    pub y_plus: f64,
    pub y_minus: f64,
    pub gradient: GradientEstimate,
    pub iterate: ProbeVector,
    pub iterate_mask: FeatureMask,
    pub y_iterate: f64,
    pub improved: bool,
}

/// Stateful SPSA run over an objective.
pub struct Spsa<'o, O: Objective + ?Sized> {
    objective: &'o O,
    schedule: GainSchedule,
    config: RunConfig,
    rng: Stream,
    iterate: ProbeVector,
    iterations: usize,
    evaluations: usize,
    best: Option<LossMeasurement>,
    since_improvement: usize,
    trace: Vec<TraceRow>,
}

impl<'o, O: Objective + ?Sized> Spsa<'o, O> {
    pub fn new(objective: &'o O, schedule: GainSchedule, config: RunConfig) -> Result<Self> {
        schedule.validate()?;
        config.validate()?;
        let p = objective.dimension();
        if p == 0 {
            return Err(Error::InvalidDimension("objective has no features".into()));
        }
        Ok(Self {
            objective,
            iterate: ProbeVector::constant(p, config.initial_component),
            rng: stream(config.master_seed),
            schedule,
            config,
            iterations: 0,
            evaluations: 0,
            best: None,
            since_improvement: 0,
            trace: Vec::new(),
        })
    }

    pub fn iterate(&self) -> &ProbeVector {
        &self.iterate
    }

    pub fn best(&self) -> Option<&LossMeasurement> {
        self.best.as_ref()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Why the run should stop now, if it should.
    pub fn termination(&self) -> Option<Termination> {
        if self.iterations >= self.config.max_iterations {
            Some(Termination::MaxIterations)
        } else if self.iterations > 0 && self.since_improvement >= self.config.stall_limit() {
            Some(Termination::Stalled)
        } else {
            None
        }
    }

    fn measure(&mut self, mask: &FeatureMask) -> Result<(f64, bool)> {
        let seed = self.rng.next_u64();
        let m = evaluate(self.objective, mask, seed)?;
        self.evaluations += 1;
        let loss = m.loss();
        let improved = self.best.as_ref().is_none_or(|b| loss < b.loss());
        if improved {
            self.best = Some(m);
        }
        Ok((loss, improved))
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let delta = sample_perturbation(self.iterate.len(), &mut self.rng)?;
        self.step_with(delta)
    }

    /// Runs one iteration with a caller-supplied perturbation.
    pub fn step_with(&mut self, delta: PerturbationVector) -> Result<StepReport> {
        let k = self.iterations + 1;
        let ck = self.schedule.gain_c(k);
        let ak = self.schedule.gain_a(k);

        let (plus, minus) = perturb(&self.iterate, ck, &delta)?;
        let plus_mask = round_mask(&bound(&plus))?;
        let minus_mask = round_mask(&bound(&minus))?;
        let (y_plus, imp_plus) = self.measure(&plus_mask)?;
        let (y_minus, imp_minus) = self.measure(&minus_mask)?;

        let gradient = estimate_gradient(y_plus, y_minus, ck, &delta)?;
        let stepped = update(&self.iterate, ak, &gradient)?;
        self.iterate = match self.schedule.mode {
            SpsaMode::Binary => bound(&stepped),
            SpsaMode::Continuous => stepped,
        };
        let iterate_mask = round_mask(&bound(&self.iterate))?;
        let (y_iterate, imp_iterate) = self.measure(&iterate_mask)?;

        let improved = imp_plus || imp_minus || imp_iterate;
        self.since_improvement = if improved { 0 } else { self.since_improvement + 1 };
        self.iterations = k;
        let best_so_far = self.best.as_ref().map_or(f64::INFINITY, LossMeasurement::loss);
        self.trace.push(TraceRow {
            iteration: k,
            y_plus: Some(y_plus),
            y_minus: Some(y_minus),
            y_iterate: Some(y_iterate),
            best_so_far,
            selected_count: iterate_mask.selected_count(),
        });

        Ok(StepReport {
            iteration: k,
            delta,
            gain_a: ak,
            gain_c: ck,
            plus_mask,
            minus_mask,
            y_plus,
            y_minus,
            gradient,
            iterate: self.iterate.clone(),
            iterate_mask,
            y_iterate,
            improved,
        })
    }

    pub fn run(mut self) -> Result<FsResult> {
        while self.termination().is_none() {
            self.step()?;
        }
        self.finish()
    }

    pub fn finish(self) -> Result<FsResult> {
        let termination = self
            .termination()
            .ok_or_else(|| Error::Contract("run finished before a stopping rule fired".into()))?;
        let best = self
            .best
            .ok_or_else(|| Error::Contract("no evaluation was made".into()))?;
        Ok(FsResult {
            best_mask: best.mask.clone(),
            best_measurement: best,
            evaluations: self.evaluations,
            iterations: self.iterations,
            trace: self.trace,
            termination,
        })
    }
}

/// Runs SPSA to termination.
pub fn run<O: Objective + ?Sized>(objective: &O, schedule: GainSchedule, config: RunConfig) -> Result<FsResult> {
    Spsa::new(objective, schedule, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn perturbation_components_are_signs() {
        let mut rng = stream(1);
        let d = sample_perturbation(1, &mut rng).unwrap();
        assert!(d.components()[0] == 1 || d.components()[0] == -1);
        assert!(matches!(
            sample_perturbation(0, &mut rng),
            Err(Error::InvalidDimension(_))
        ));
        assert!(PerturbationVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn perturbation_is_balanced_and_replayable() {
        let d = sample_perturbation(10_000, &mut stream(77)).unwrap();
        let mean = d.components().iter().map(|&v| f64::from(v)).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert_eq!(d, sample_perturbation(10_000, &mut stream(77)).unwrap());
    }

    #[test]
    fn step_size_values() {
        let small = GainSchedule::binary_small();
        assert!(close(small.gain_a(1), 0.047, 0.001));
        // 0.75/101^0.6 and 1.5/301^0.6 from a 30-digit reference evaluation.
        assert!(close(small.gain_a(1), 0.047_040_121_967_127_3, 1e-15));
        assert!(close(
            GainSchedule::binary_large().gain_a(1),
            0.048_859_763_635_991_8,
            1e-15
        ));
        let zero = GainSchedule {
            a: 0.0,
            ..small.clone()
        };
        assert_eq!(zero.gain_a(1), 0.0);
        assert!(zero.validate().is_err());
    }

    #[test]
    fn perturbation_size_values() {
        let b = GainSchedule::binary_small();
        assert_eq!(b.gain_c(7), 0.05);
        let c = GainSchedule::continuous();
        assert_eq!(c.gain_c(1), 0.01);
        // 0.01/32^0.1 = 0.01/√2.
        assert!(close(c.gain_c(32), 0.007_071_067_811_865_475, 1e-15));
    }

    #[test]
    fn schedule_validation() {
        assert!(GainSchedule::new(0.75, 100.0, 0.6, 0.05, 0.0, SpsaMode::Binary).is_ok());
        assert!(GainSchedule::new(0.75, -1.0, 0.6, 0.05, 0.0, SpsaMode::Binary).is_err());
        assert!(GainSchedule::new(0.75, 0.0, 1.5, 0.05, 0.0, SpsaMode::Binary).is_err());
        assert!(GainSchedule::new(0.75, 0.0, 0.6, 0.0, 0.0, SpsaMode::Binary).is_err());
    }

    #[test]
    fn perturb_examples() {
        let d = PerturbationVector::new(vec![1, 1, -1, -1]).unwrap();
        let (p, m) = perturb(&ProbeVector::constant(4, 0.5), 0.05, &d).unwrap();
        for (got, want) in p.0.iter().zip([0.55, 0.55, 0.45, 0.45]) {
            assert!(close(*got, want, 1e-15));
        }
        for (got, want) in m.0.iter().zip([0.45, 0.45, 0.55, 0.55]) {
            assert!(close(*got, want, 1e-15));
        }
        let w = ProbeVector(vec![0.2, 0.9, 0.4, 0.1]);
        assert_eq!(perturb(&w, 0.0, &d).unwrap(), (w.clone(), w));
        let (p, m) = perturb(
            &ProbeVector(vec![0.98]),
            0.05,
            &PerturbationVector::new(vec![1]).unwrap(),
        )
        .unwrap();
        assert!(close(p.0[0], 1.03, 1e-12) && close(m.0[0], 0.93, 1e-12));
        assert!(perturb(&ProbeVector(vec![0.5]), 0.05, &d).is_err());
    }

    #[test]
    fn bound_and_round_examples() {
        assert_eq!(bound(&ProbeVector(vec![1.03, -0.02])).0, vec![1.0, 0.0]);
        let interior = ProbeVector(vec![0.55, 0.55, 0.45, 0.45]);
        assert_eq!(bound(&interior), interior);
        assert_eq!(round_mask(&interior).unwrap(), FeatureMask::from_ints(&[1, 1, 0, 0]));
        assert_eq!(round_mask(&ProbeVector(vec![0.5, 0.5])).unwrap(), FeatureMask::full(2));
        assert_eq!(
            round_mask(&ProbeVector(vec![0.49999, 0.50001])).unwrap(),
            FeatureMask::from_ints(&[0, 1])
        );
        assert!(matches!(round_mask(&ProbeVector(vec![1.2])), Err(Error::Contract(_))));
    }

    #[test]
    fn gradient_examples() {
        let d = PerturbationVector::new(vec![1, 1, -1, -1]).unwrap();
        let g = estimate_gradient(0.12, 0.08, 0.05, &d).unwrap();
        for (got, want) in g.0.iter().zip([0.4, 0.4, -0.4, -0.4]) {
            assert!(close(*got, want, 1e-12));
        }
        assert!(estimate_gradient(0.3, 0.3, 0.05, &d)
            .unwrap()
            .0
            .iter()
            .all(|&v| v == 0.0));
        let g = estimate_gradient(0.2, 0.1, 0.05, &PerturbationVector::new(vec![1, -1]).unwrap()).unwrap();
        assert!(close(g.0[0], 1.0, 1e-12) && close(g.0[1], -1.0, 1e-12));
        assert!(matches!(
            estimate_gradient(0.2, 0.1, 0.0, &d),
            Err(Error::InvalidGain(_))
        ));
    }

    #[test]
    fn update_examples() {
        let g = GradientEstimate(vec![0.4, 0.4, -0.4, -0.4]);
        let w = update(&ProbeVector::constant(4, 0.5), 0.047, &g).unwrap();
        for (got, want) in w.0.iter().zip([0.4812, 0.4812, 0.5188, 0.5188]) {
            assert!(close(*got, want, 1e-4));
        }
        let w0 = ProbeVector(vec![0.1, 0.7]);
        assert_eq!(update(&w0, 0.3, &GradientEstimate(vec![0.0, 0.0])).unwrap(), w0);
        assert!(close(
            update(&ProbeVector(vec![0.3]), 0.5, &GradientEstimate(vec![-1.0]))
                .unwrap()
                .0[0],
            0.8,
            1e-12
        ));
        assert!(update(&w0, 0.3, &GradientEstimate(vec![0.0])).is_err());
    }

    #[test]
    fn worked_iteration() {
        let oracle = FnObjective::new(4, |m: &FeatureMask| match m.to_string().as_str() {
            "1100" => 0.12,
            "0011" => 0.08,
            _ => 0.5,
        });
        let mut spsa = Spsa::new(&oracle, GainSchedule::binary_small(), RunConfig::default()).unwrap();
        let report = spsa
            .step_with(PerturbationVector::new(vec![1, 1, -1, -1]).unwrap())
            .unwrap();
        assert_eq!(report.plus_mask, FeatureMask::from_ints(&[1, 1, 0, 0]));
        assert_eq!(report.minus_mask, FeatureMask::from_ints(&[0, 0, 1, 1]));
        assert!(close(report.gain_a, 0.047, 0.001));
        for (got, want) in report.iterate.0.iter().zip([0.4812, 0.4812, 0.5188, 0.5188]) {
            assert!(close(*got, want, 1e-4), "{got} vs {want}");
        }
        assert_eq!(report.iterate_mask, FeatureMask::from_ints(&[0, 0, 1, 1]));
        assert_eq!(spsa.evaluations(), 3);
    }

    #[test]
    fn constant_oracle_stalls_on_first_mask() {
        let oracle = FnObjective::new(5, |_: &FeatureMask| 0.3);
        let cfg = RunConfig {
            max_iterations: 40,
            master_seed: 3,
            ..RunConfig::default()
        };
        let mut spsa = Spsa::new(&oracle, GainSchedule::binary_small(), cfg.clone()).unwrap();
        let first = spsa.step().unwrap();
        let result = run(&oracle, GainSchedule::binary_small(), cfg).unwrap();
        assert_eq!(result.termination, Termination::Stalled);
        assert_eq!(result.best_mask, first.plus_mask);
        assert_eq!(result.iterations, 1 + 10);
        assert!(result.trace.iter().all(|r| r.best_so_far == 0.3));
        assert_eq!(result.evaluations, 3 * result.iterations);
    }

    #[test]
    fn two_feature_problem_matches_enumeration() {
        let loss = |m: &FeatureMask| -> f64 {
            if m.is_none_selected() {
                1.0
            } else {
                1.0 - f64::from(u8::from(m.get(0)))
            }
        };
        let oracle = FnObjective::new(2, loss);
        let cfg = RunConfig {
            max_iterations: 100,
            master_seed: 11,
            ..RunConfig::default()
        };
        let result = run(&oracle, GainSchedule::binary_small(), cfg).unwrap();
        let best_enumerated = [[1u8, 0], [0, 1], [1, 1]]
            .iter()
            .map(|b| loss(&FeatureMask::from_ints(b)))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(result.best_measurement.loss(), best_enumerated);
        assert!(result.best_mask.get(0));
    }

    #[test]
    fn continuous_mode_leaves_iterate_unbounded() {
        // Loss decreases with feature 0 selected; the gradient keeps pushing
        // its component upward without a clamp.
        let oracle = FnObjective::new(3, |m: &FeatureMask| if m.get(0) { 0.0 } else { 1.0 });
        let cfg = RunConfig {
            max_iterations: 200,
            stall_fraction: 1.0,
            master_seed: 2,
            ..RunConfig::default()
        };
        let schedule = GainSchedule {
            a: 0.5,
            ..GainSchedule::continuous()
        };
        let mut spsa = Spsa::new(&oracle, schedule, cfg).unwrap();
        while spsa.termination().is_none() {
            spsa.step().unwrap();
        }
        assert!(spsa.iterate().0[0] > 1.0, "{:?}", spsa.iterate());
    }

    #[test]
    fn objective_failure_carries_mask() {
        struct Failing;
        impl Objective for Failing {
            fn dimension(&self) -> usize {
                2
            }
            fn measure(&self, _: &FeatureMask, _: u64) -> Result<LossMeasurement> {
                Err(Error::Classifier("no".into()))
            }
        }
        let err = run(&Failing, GainSchedule::binary_small(), RunConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Objective { .. }));
    }

    proptest! {
        #[test]
        fn gradient_sign_identity_and_antisymmetry(
            y_plus in -5.0f64..5.0,
            y_minus in -5.0f64..5.0,
            c in 0.001f64..1.0,
            signs in proptest::collection::vec(any::<bool>(), 1..32),
        ) {
            let delta = PerturbationVector::new(signs.iter().map(|&s| if s { 1 } else { -1 }).collect()).unwrap();
            let g = estimate_gradient(y_plus, y_minus, c, &delta).unwrap();
            let r = estimate_gradient(y_minus, y_plus, c, &delta).unwrap();
            let magnitude = (y_plus - y_minus).abs() / (2.0 * c);
            for (i, &d) in delta.components().iter().enumerate() {
                prop_assert_eq!(g.0[i], (y_plus - y_minus) / (2.0 * c) * f64::from(d));
                prop_assert_eq!(r.0[i], -g.0[i]);
                prop_assert!((g.0[i].abs() - magnitude).abs() <= 1e-12 * magnitude.max(1.0));
            }
        }

        #[test]
        fn bound_and_round_are_idempotent(w in proptest::collection::vec(-2.0f64..3.0, 1..32)) {
            let w = ProbeVector(w);
            let b = bound(&w);
            prop_assert_eq!(bound(&b), b.clone());
            prop_assert_eq!(round_mask(&bound(&b)).unwrap(), round_mask(&b).unwrap());
        }

        #[test]
        fn step_size_strictly_decreases(k in 1usize..10_000, a in 0.01f64..5.0, big_a in 0.0f64..500.0, alpha in 0.05f64..1.0) {
            let s = GainSchedule::new(a, big_a, alpha, 0.05, 0.0, SpsaMode::Binary).unwrap();
            prop_assert!(s.gain_a(k + 1) < s.gain_a(k));
            prop_assert_eq!(s.gain_c(k), s.gain_c(k + 1));
        }
    }
}
