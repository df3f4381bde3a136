use serde::{Deserialize, Serialize};

use crate::engine::ModelParams;
use crate::error::{invalid, Result};

/// The per-individual rates (μ, q, γ) without a population size, for
/// evaluating formulas at sizes no integer type can hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub mutation_rate: f64,
    pub beneficial_fraction: f64,
    pub selection_strength: f64,
}

impl RateParams {
    pub fn new(mutation_rate: f64, beneficial_fraction: f64, selection_strength: f64) -> Result<Self> {
        if !(mutation_rate > 0.0 && mutation_rate.is_finite()) {
            return Err(invalid("mutation_rate", "must be positive and finite"));
        }
        if !(beneficial_fraction > 0.0 && beneficial_fraction <= 1.0) {
            return Err(invalid("beneficial_fraction", "must lie in (0, 1]"));
        }
        if !(selection_strength >= 0.0 && selection_strength.is_finite()) {
            return Err(invalid("selection_strength", "must be nonnegative and finite"));
        }
        Ok(Self {
            mutation_rate,
            beneficial_fraction,
            selection_strength,
        })
    }

    /// d = (1+q)μ + 1.
    pub fn death_rate(&self) -> f64 {
        (1.0 + self.beneficial_fraction) * self.mutation_rate + 1.0
    }

    /// qμ.
    pub fn beneficial_rate(&self) -> f64 {
        self.beneficial_fraction * self.mutation_rate
    }
}

impl From<&ModelParams> for RateParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            mutation_rate: p.mutation_rate,
            beneficial_fraction: p.beneficial_fraction,
            selection_strength: p.selection_strength,
        }
    }
}

/// Time and size scales of the block construction for one population size.
///
/// * 𝒯 = 16 (log log N)² / (γ log N)
/// * 𝒲 = log N / (8 log log N)
/// * w = γ𝒲/2, d = (1+q)μ + 1
/// * s_i = 2i𝒯, and M is the integer with M < t/(2𝒯) ≤ M + 1
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub log_n: f64,
    pub loglog_n: f64,
    pub rates: RateParams,
    pub horizon: f64,
    pub big_t: f64,
    pub big_w: f64,
    pub birth_rate_w: f64,
    pub death_rate_d: f64,
    pub m_steps: u64,
    /// s_0, …, s_{M+1}.
    pub grid: Vec<f64>,
}

const MAX_GRID: u64 = 10_000_000;

impl ScalingConstants {
    pub fn from_log_n(log_n: f64, rates: RateParams, horizon: f64) -> Result<Self> {
        if !(log_n > 1.0 && log_n.is_finite()) {
            return Err(invalid("log_n", "log log N must be positive"));
        }
        if !(rates.selection_strength > 0.0) {
            return Err(invalid("selection_strength", "scaling constants need γ > 0"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive and finite"));
        }
        let gamma = rates.selection_strength;
        let loglog_n = log_n.ln();
        let big_t = 16.0 * loglog_n * loglog_n / (gamma * log_n);
        let big_w = log_n / (8.0 * loglog_n);
        let birth_rate_w = gamma * big_w / 2.0;
        let ratio = horizon / (2.0 * big_t);
        if ratio > MAX_GRID as f64 {
            return Err(invalid("horizon", "block grid would exceed 10⁷ intervals"));
        }
        let m_steps = (ratio.ceil() as u64).saturating_sub(1);
        let grid = (0..=m_steps + 1).map(|i| 2.0 * i as f64 * big_t).collect();
        Ok(Self {
            log_n,
            loglog_n,
            rates,
            horizon,
            big_t,
            big_w,
            birth_rate_w,
            death_rate_d: rates.death_rate(),
            m_steps,
            grid,
        })
    }

    pub fn from_log10_n(log10_n: f64, rates: RateParams, horizon: f64) -> Result<Self> {
        Self::from_log_n(log10_n * std::f64::consts::LN_10, rates, horizon)
    }

    pub fn for_params(params: &ModelParams, horizon: f64) -> Result<Self> {
        params.validate()?;
        Self::from_log_n((params.n_individuals as f64).ln(), params.into(), horizon)
    }

    pub fn log10_n(&self) -> f64 {
        self.log_n / std::f64::consts::LN_10
    }

    /// s_i = 2i𝒯.
    pub fn s(&self, i: u64) -> f64 {
        2.0 * i as f64 * self.big_t
    }

    /// s_{M+1}, the end of the last block.
    pub fn grid_end(&self) -> f64 {
        self.s(self.m_steps + 1)
    }

    pub fn branching(&self) -> super::BranchingParams {
        super::BranchingParams {
            birth: self.birth_rate_w,
            death: self.death_rate_d,
            type_advance: self.rates.beneficial_rate(),
        }
    }
}
