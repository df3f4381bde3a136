//! Exact simulation of the asexual Moran model with mutation and selection,
//! closed-form birth-death branching laws, trajectory functionals, and an
//! ensemble harness for measuring the rate at which the fittest class advances.

pub mod branching;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod observables;
pub mod rng;
pub mod stats;

pub use branching::{BranchingParams, ScalingConstants};
pub use engine::{
    Event, EventKind, LevelHistogram, ModelParams, RateBundle, Simulator, TrajectorySample,
};
pub use error::{Error, Result};
