use std::collections::BTreeMap;

use serde::Serialize;

use super::{event_frequencies, EventFrequency, ReplicateResult};
use crate::error::{Error, Result};
use crate::stats::{correlation_p_positive, ols, spearman, t_for, wilson, MeanSe, Proportion};

pub const MIN_LADDER: usize = 3;
pub const MIN_REPLICATES: u64 = 30;

/// log N / (log log N)².
pub fn scaling_predictor(n: u64) -> f64 {
    let log_n = (n as f64).ln();
    log_n / log_n.ln().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: u64,
    pub predictor: f64,
    pub rate: MeanSe,
    pub lambda_k: Option<Proportion>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub per_n: Vec<RateRow>,
    /// Estimated c in rate ≈ c·log N/(log log N)² + intercept.
    pub slope: f64,
    pub slope_se: f64,
    /// 95% t-interval for the slope.
    pub slope_ci: (f64, f64),
    pub intercept: f64,
    /// Spearman correlation of replicate rates with the predictor.
    pub rank_correlation: Option<f64>,
    /// One-sided p-value for a positive rank correlation.
    pub rank_p_value: Option<f64>,
    pub replicates_used: u64,
    pub excluded: u64,
    pub event_e: Vec<EventFrequency>,
}

/// Regresses per-N mean X⁺_t/t on log N/(log log N)².
///
/// Results are sorted by (N, replicate) before any summation, so the report
/// does not depend on input order.
pub fn fit_scaling(results: &[ReplicateResult]) -> Result<FitReport> {
    let mut sorted: Vec<&ReplicateResult> = results.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.replicate));
    let excluded = sorted.iter().filter(|r| !r.is_ok()).count() as u64;
    let mut groups: BTreeMap<u64, Vec<&ReplicateResult>> = BTreeMap::new();
    for r in sorted.iter().filter(|r| r.is_ok()) {
        groups.entry(r.n).or_default().push(r);
    }
    if groups.len() < MIN_LADDER {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_LADDER} population sizes, got {}",
            groups.len()
        )));
    }
    if let Some((n, g)) = groups.iter().find(|(_, g)| (g.len() as u64) < MIN_REPLICATES) {
        return Err(Error::InsufficientData(format!(
            "N = {n} has {} successful replicates, need {MIN_REPLICATES}",
            g.len()
        )));
    }
    let mut per_n = Vec::with_capacity(groups.len());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&n, g) in &groups {
        let rates: Vec<f64> = g.iter().map(|r| r.rate_max).collect();
        let predictor = scaling_predictor(n);
        xs.extend(std::iter::repeat_n(predictor, rates.len()));
        ys.extend_from_slice(&rates);
        let flags: Vec<bool> = g.iter().filter_map(|r| r.lambda_k_member).collect();
        let lambda_k = (!flags.is_empty()).then(|| {
            wilson(flags.iter().filter(|&&f| f).count() as u64, flags.len() as u64, 0.95)
        });
        per_n.push(RateRow {
            n,
            predictor,
            rate: MeanSe::of(&rates),
            lambda_k,
        });
    }
    let px: Vec<f64> = per_n.iter().map(|r| r.predictor).collect();
    let py: Vec<f64> = per_n.iter().map(|r| r.rate.mean).collect();
    let fit = ols(&px, &py)
        .ok_or_else(|| Error::InsufficientData("predictor takes a single value across the ladder".into()))?;
    let half = t_for(0.95, fit.dof) * fit.slope_se;
    let rho = spearman(&xs, &ys);
    let owned: Vec<ReplicateResult> = sorted.iter().map(|r| (*r).clone()).collect();
    Ok(FitReport {
        per_n,
        slope: fit.slope,
        slope_se: fit.slope_se,
        slope_ci: (fit.slope - half, fit.slope + half),
        intercept: fit.intercept,
        rank_correlation: rho,
        rank_p_value: rho.map(|r| correlation_p_positive(r, ys.len())),
        replicates_used: ys.len() as u64,
        excluded,
        event_e: event_frequencies(&owned).per_n,
    })
}
