//! Wrapper feature selection driven by binary simultaneous perturbation
//! stochastic approximation (BSPSA).
//!
//! The crate is organised around a single abstraction, [`Objective`]: a noisy
//! oracle mapping a [`FeatureMask`] to a [`LossMeasurement`]. The repeated
//! k-fold cross-validation objective in [`objective`] is the production
//! oracle; every search method ([`spsa`], [`baselines`]) consumes it through
//! the same trait, so results are comparable evaluation-for-evaluation.

pub mod baselines;
pub mod classifiers;
pub mod data;
pub mod error;
pub mod experiment;
pub mod mask;
pub mod objective;
pub mod rng;
pub mod spsa;
pub mod stats;

pub use classifiers::ClassifierKind;
pub use data::{Dataset, Matrix};
pub use error::{Error, Result};
pub use mask::FeatureMask;
pub use objective::{CvConfig, CvObjective, LossMeasurement, Metric, Objective};
pub use spsa::{FsResult, GainSchedule, RunConfig, SpsaMode, Termination, TraceRow};
