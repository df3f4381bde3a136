use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::SweepConfig;
use crate::branching::ScalingConstants;
use crate::engine::{simulate_with, ModelParams, SimulateOptions};
use crate::error::{invalid, Error, Result};
use crate::observables::{event_e_indicator, lambda_k_member, run_tracked, TrackOptions};
use crate::rng::{replicate_rng, stream_id};
use crate::stats::{wilson, MeanSe, Proportion};

/// Outcome of one replicate. Quantities that need the scaling constants
/// (N ≥ 3 and γ > 0) are `None` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateResult {
    pub n: u64,
    pub replicate: u64,
    pub seed_stream: u64,
    pub horizon: f64,
    pub m_steps: Option<u64>,
    pub mean_fitness_final: f64,
    pub c2_final: f64,
    pub max_fitness_final: i64,
    /// X⁺_t / t.
    pub rate_max: f64,
    pub event_e: Option<bool>,
    pub lambda_k_member: Option<bool>,
    pub wallclock_s: Option<f64>,
    /// `None` on success, else the error message.
    pub error: Option<String>,
}

impl ReplicateResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(n: u64, replicate: u64, horizon: f64, err: &Error) -> Self {
        Self {
            n,
            replicate,
            seed_stream: stream_id(n, replicate),
            horizon,
            m_steps: None,
            mean_fitness_final: f64::NAN,
            c2_final: f64::NAN,
            max_fitness_final: 0,
            rate_max: f64::NAN,
            event_e: None,
            lambda_k_member: None,
            wallclock_s: None,
            error: Some(err.to_string()),
        }
    }
}

fn constants_for(params: &ModelParams, horizon: f64) -> Option<ScalingConstants> {
    ScalingConstants::for_params(params, horizon).ok()
}

/// Runs replicate `replicate` at population size `n`.
pub fn run_replicate(cfg: &SweepConfig, n: u64, replicate: u64) -> ReplicateResult {
    let horizon = cfg.resolved_horizon();
    let start = cfg.record_wallclock.then(Instant::now);
    match replicate_inner(cfg, n, replicate, horizon) {
        Ok(mut r) => {
            r.wallclock_s = start.map(|s| s.elapsed().as_secs_f64());
            r
        }
        Err(e) => ReplicateResult::failed(n, replicate, horizon, &e),
    }
}

fn replicate_inner(cfg: &SweepConfig, n: u64, replicate: u64, horizon: f64) -> Result<ReplicateResult> {
    let params = cfg.model(n)?;
    let mut rng = replicate_rng(cfg.seed, n, replicate);
    let mut times = cfg.sample_times();
    if times.last() != Some(&horizon) {
        times.push(horizon);
    }
    let constants = constants_for(&params, horizon);
    let (final_sample, m_steps, event_e, member) = match &constants {
        Some(c) => {
            let m = cfg.barrier_m.unwrap_or(c.m_steps);
            let run_to = if cfg.lambda_k.is_some() {
                horizon.max(c.grid_end())
            } else {
                horizon
            };
            let opts = TrackOptions {
                sample_times: times,
                max_events: cfg.max_events,
                ..TrackOptions::default()
            };
            let run = run_tracked(&params, run_to, &c.grid, &opts, &mut rng)?;
            let e = event_e_indicator(&run.trajectory, c.big_t, m, horizon)?;
            let member = cfg.lambda_k.map(|k| lambda_k_member(&run.marks, c, k));
            let last = run.samples.into_iter().last();
            (last, Some(m), Some(e), member)
        }
        None => {
            let opts = SimulateOptions {
                keep_snapshots: false,
                max_events: cfg.max_events,
            };
            let samples = simulate_with(&params, horizon, &times, &mut rng, opts)?;
            (samples.into_iter().last(), None, None, None)
        }
    };
    let last = final_sample.ok_or_else(|| Error::CorruptState("no sample at the horizon".into()))?;
    Ok(ReplicateResult {
        n,
        replicate,
        seed_stream: stream_id(n, replicate),
        horizon,
        m_steps,
        mean_fitness_final: last.mean_fitness,
        c2_final: last.centered_variance,
        max_fitness_final: last.max_fitness,
        rate_max: last.max_fitness as f64 / horizon,
        event_e,
        lambda_k_member: member,
        wallclock_s: None,
        error: None,
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| Error::CorruptState(format!("worker pool: {e}")))
}

/// Every (N, replicate) pair on a bounded pool, sorted by (N, replicate).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ReplicateResult>> {
    cfg.validate()?;
    let tasks: Vec<(u64, u64)> = cfg
        .n_ladder
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    let mut out: Vec<ReplicateResult> = pool(cfg.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(n, r)| run_replicate(cfg, n, r))
            .collect()
    });
    canonical_sort(&mut out);
    Ok(out)
}

pub fn canonical_sort(results: &mut [ReplicateResult]) {
    results.sort_by_key(|r| (r.n, r.replicate));
}

/// Ensemble estimate of E[X̄_t]/t under neutral dynamics.
pub fn drift_check(params: &ModelParams, horizon: f64, replicates: u64, seed: u64) -> Result<MeanSe> {
    params.validate()?;
    if params.selection_strength != 0.0 {
        return Err(invalid("selection_strength", "the drift check needs γ = 0"));
    }
    if replicates < 2 {
        return Err(invalid("replicates", "need at least 2 for a standard error"));
    }
    let n = params.n_individuals;
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, n, r);
            let s = simulate_with(params, horizon, &[horizon], &mut rng, SimulateOptions::default())?;
            Ok(s[0].mean_fitness / horizon)
        })
        .collect::<Result<_>>()?;
    Ok(MeanSe::of(&values))
}

/// Wilson frequency of ℰ at one population size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventFrequency {
    pub n: u64,
    pub m_steps: u64,
    pub frequency: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventEstimate {
    pub per_n: Vec<EventFrequency>,
    pub excluded: u64,
    pub warnings: Vec<String>,
}

/// Per-N frequency of ℰ with 95% Wilson intervals over successful replicates.
pub fn event_frequencies(results: &[ReplicateResult]) -> EventEstimate {
    let mut per_n: Vec<EventFrequency> = Vec::new();
    let mut excluded = 0;
    let mut warnings = Vec::new();
    let mut sorted: Vec<&ReplicateResult> = results.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.replicate));
    for group in sorted.chunk_by(|a, b| a.n == b.n) {
        let n = group[0].n;
        let flags: Vec<(bool, u64)> = group
            .iter()
            .filter(|r| r.is_ok())
            .filter_map(|r| Some((r.event_e?, r.m_steps?)))
            .collect();
        excluded += group.iter().filter(|r| !r.is_ok()).count() as u64;
        if flags.is_empty() {
            warnings.push(format!("N = {n}: ℰ is undefined (needs N ≥ 3 and γ > 0)"));
            continue;
        }
        let m = flags[0].1;
        if m == 0 {
            warnings.push(format!("N = {n}: M = 0, the barrier is zero and the estimate is vacuous"));
        }
        let hits = flags.iter().filter(|f| f.0).count() as u64;
        per_n.push(EventFrequency {
            n,
            m_steps: m,
            frequency: wilson(hits, flags.len() as u64, 0.95),
        });
    }
    EventEstimate {
        per_n,
        excluded,
        warnings,
    }
}

/// Runs the sweep with the barrier slope optionally replaced, and reports
/// the per-N frequency of ℰ.
pub fn estimate_event_probability(cfg: &SweepConfig, m_override: Option<u64>) -> Result<EventEstimate> {
    let mut cfg = cfg.clone();
    if m_override.is_some() {
        cfg.barrier_m = m_override;
    }
    let t = cfg.resolved_horizon();
    for &n in &cfg.n_ladder {
        if let Ok(c) = ScalingConstants::for_params(&cfg.model(n)?, t) {
            if c.big_t > t {
                return Err(invalid("horizon", format!("t = {t} is below 𝒯 = {} at N = {n}", c.big_t)));
            }
        }
    }
    Ok(event_frequencies(&run_sweep(&cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::from_json(text).unwrap()
    }

    fn small() -> SweepConfig {
        cfg(r#"{"n_ladder":[8,16],"params":{"mu":1,"q":1,"gamma":4},"horizon":2.0,"replicates":4,"seed":21,"lambda_k":3}"#)
    }

    #[test]
    fn smoke_single_row() {
        let c = cfg(r#"{"n_ladder":[5],"params":{"mu":1,"q":0.5,"gamma":1},"horizon":0.1,"replicates":1,"seed":1}"#);
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].is_ok(), "{:?}", r[0].error);
        assert_eq!(r[0].rate_max, r[0].max_fitness_final as f64 / 0.1);
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let mut a = small();
        a.workers = Some(1);
        let mut b = small();
        b.workers = Some(3);
        let ra = run_sweep(&a).unwrap();
        let rb = run_sweep(&b).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(ra, run_sweep(&a).unwrap());
        assert!(ra.iter().all(|r| r.lambda_k_member.is_some() && r.event_e.is_some()));
    }

    #[test]
    fn failures_are_tagged_not_dropped() {
        let mut c = small();
        c.max_events = Some(3);
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.iter().all(|x| x.error.as_deref().is_some_and(|e| e.contains("budget"))));
        let est = event_frequencies(&r);
        assert_eq!(est.excluded, 8);
    }

    #[test]
    fn drift_rejects_selection() {
        let p = ModelParams::new(10, 1.0, 0.5, 0.5).unwrap();
        assert!(drift_check(&p, 1.0, 10, 1).is_err());
    }

    #[test]
    fn drift_matches_mutation_bias() {
        for (q, target) in [(0.5, 0.0), (1.0, 1.0), (0.6, 0.2)] {
            let p = ModelParams::new(50, 1.0, q, 0.0).unwrap();
            let est = drift_check(&p, 5.0, 60, 77).unwrap();
            assert!(est.within(target, 3.0), "q = {q}: {est:?}");
        }
    }

    #[test]
    fn barrier_overrides() {
        let c = small();
        let zero = estimate_event_probability(&c, Some(0)).unwrap();
        assert!(zero.per_n.iter().all(|f| f.frequency.estimate == 1.0));
        assert!(zero.warnings.iter().any(|w| w.contains("vacuous")));
        let high = estimate_event_probability(&c, Some(1_000_000)).unwrap();
        assert!(high.per_n.iter().all(|f| f.frequency.estimate == 0.0));
    }
}
