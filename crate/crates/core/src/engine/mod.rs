//! Exact continuous-time simulation of the N-individual fitness process.
//!
//! Individuals are exchangeable under every transition rate, so the state is a
//! level→count histogram. Each event moves exactly one individual:
//!
//! * beneficial / deleterious mutation: `k → k ± 1`, rate `qμ` / `(1−q)μ` per individual;
//! * resampling: an individual at `a` adopts the level `b ≠ a` of another, rate `1/N` per ordered pair;
//! * selection: an individual at `a` adopts `b > a`, rate `γ(b − a)/N` per ordered pair.

mod histogram;
mod rates;
mod simulator;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use histogram::{HistogramSnapshot, LevelCount, LevelHistogram};
pub use rates::{total_rates, RateBundle};
pub use simulator::{simulate, simulate_with, SimulateOptions, Simulator};

/// The model quadruple (N, μ, q, γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_individuals: u64,
    pub mutation_rate: f64,
    pub beneficial_fraction: f64,
    pub selection_strength: f64,
}

impl ModelParams {
    pub fn new(
        n_individuals: u64,
        mutation_rate: f64,
        beneficial_fraction: f64,
        selection_strength: f64,
    ) -> Result<Self> {
        let p = Self {
            n_individuals,
            mutation_rate,
            beneficial_fraction,
            selection_strength,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_individuals < 2 {
            return Err(invalid("n_individuals", "need at least 2 individuals"));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate.is_finite()) {
            return Err(invalid("mutation_rate", "must be positive and finite"));
        }
        if !(self.beneficial_fraction > 0.0 && self.beneficial_fraction <= 1.0) {
            return Err(invalid("beneficial_fraction", "must lie in (0, 1]"));
        }
        if !(self.selection_strength >= 0.0 && self.selection_strength.is_finite()) {
            return Err(invalid("selection_strength", "must be nonnegative and finite"));
        }
        Ok(())
    }

    /// d = (1+q)μ + 1.
    pub fn death_rate(&self) -> f64 {
        (1.0 + self.beneficial_fraction) * self.mutation_rate + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    BeneficialMutation(i64),
    DeleteriousMutation(i64),
    /// An individual at `from` is overwritten by a copy of one at `to`.
    Resample { from: i64, to: i64 },
    /// An individual at `from` is replaced by a copy of a fitter one at `to`.
    Selection { from: i64, to: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Mutation,
    Resample,
    Selection,
}

impl EventKind {
    pub fn category(&self) -> Category {
        match self {
            Self::BeneficialMutation(_) | Self::DeleteriousMutation(_) => Category::Mutation,
            Self::Resample { .. } => Category::Resample,
            Self::Selection { .. } => Category::Selection,
        }
    }

    /// Level of the individual whose fitness changes.
    pub fn source_level(&self) -> i64 {
        match *self {
            Self::BeneficialMutation(k) | Self::DeleteriousMutation(k) => k,
            Self::Resample { from, .. } | Self::Selection { from, .. } => from,
        }
    }

    /// Level that individual ends up at.
    pub fn target_level(&self) -> i64 {
        match *self {
            Self::BeneficialMutation(k) => k + 1,
            Self::DeleteriousMutation(k) => k - 1,
            Self::Resample { to, .. } | Self::Selection { to, .. } => to,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
}

/// Observables recorded at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub mean_fitness: f64,
    pub centered_variance: f64,
    pub max_fitness: i64,
    pub median_level: i64,
    pub histogram_snapshot: Option<LevelHistogram>,
}

impl TrajectorySample {
    pub fn observe(time: f64, hist: &LevelHistogram, keep_snapshot: bool) -> Self {
        Self {
            time,
            mean_fitness: hist.mean_fitness(),
            centered_variance: hist.centered_variance(),
            max_fitness: hist.max_fitness(),
            median_level: hist.median_level(),
            histogram_snapshot: keep_snapshot.then(|| hist.clone()),
        }
    }
}

pub fn mean_fitness(hist: &LevelHistogram) -> f64 {
    hist.mean_fitness()
}

pub fn centered_variance(hist: &LevelHistogram) -> f64 {
    hist.centered_variance()
}

pub fn max_fitness(hist: &LevelHistogram) -> i64 {
    hist.max_fitness()
}

pub fn median_level(hist: &LevelHistogram) -> i64 {
    hist.median_level()
}

/// Activates the lineage overlay on `hist`; see [`LevelHistogram::tag_lineage`].
pub fn tag_lineage(mut hist: LevelHistogram, level: i64, count: u64) -> Result<LevelHistogram> {
    hist.tag_lineage(level, count)?;
    Ok(hist)
}
