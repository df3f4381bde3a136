use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::BranchingParams;
use crate::error::{invalid, Error, Result};
use crate::rng::{seeded, SimRng};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BdPoint {
    pub time: f64,
    pub type0: u64,
    pub advanced: u64,
}

impl BdPoint {
    fn new(time: f64, type0: u64, advanced: u64) -> Self {
        Self {
            time,
            type0,
            advanced,
        }
    }

    pub fn total(&self) -> u64 {
        self.type0 + self.advanced
    }
}

/// Event-by-event path of (type-0 count, advanced count), ending with the
/// state at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct BdPath {
    pub points: Vec<BdPoint>,
}

impl BdPath {
    pub fn final_state(&self) -> BdPoint {
        *self.points.last().expect("path has an initial point")
    }
}

const MAX_BD_EVENTS: u64 = 50_000_000;

/// Exact simulation from one type-0 particle. Each particle dies at rate d,
/// splits at rate w (the offspring shares its type), and type-0 particles
/// advance at rate qμ.
pub fn simulate_bd(bp: &BranchingParams, horizon: f64, seed: u64) -> Result<BdPath> {
    simulate_bd_with(bp, horizon, &mut seeded(seed), true)
}

/// As [`simulate_bd`] on a caller-supplied stream. With `record == false`
/// only the initial and final states are kept.
pub fn simulate_bd_with(
    bp: &BranchingParams,
    horizon: f64,
    rng: &mut SimRng,
    record: bool,
) -> Result<BdPath> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive and finite"));
    }
    let (w, d, a) = (bp.birth, bp.death, bp.type_advance);
    let (mut type0, mut adv) = (1u64, 0u64);
    let mut t = 0.0;
    let mut points = vec![BdPoint::new(0.0, 1, 0)];
    let mut events = 0u64;
    while type0 + adv > 0 {
        let z = (type0 + adv) as f64;
        let total = (w + d) * z + a * type0 as f64;
        let e: f64 = rng.sample(Exp1);
        t += e / total;
        if t > horizon {
            break;
        }
        events += 1;
        if events > MAX_BD_EVENTS {
            return Err(Error::EventBudget(MAX_BD_EVENTS));
        }
        let u = rng.random::<f64>() * total;
        let pick_type0 = |rng: &mut SimRng| rng.random_range(0..type0 + adv) < type0;
        if u < w * z {
            if pick_type0(rng) {
                type0 += 1;
            } else {
                adv += 1;
            }
        } else if u < (w + d) * z {
            if pick_type0(rng) {
                type0 -= 1;
            } else {
                adv -= 1;
            }
        } else {
            type0 -= 1;
            adv += 1;
        }
        if record {
            points.push(BdPoint::new(t, type0, adv));
        }
    }
    points.push(BdPoint::new(horizon, type0, adv));
    Ok(BdPath { points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfRow {
    pub count: u64,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    /// Mean number of advanced-type particles over paths ending at `count`.
    pub mean_advanced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfComparison {
    pub paths: u64,
    pub rows: Vec<PmfRow>,
    pub empirical_tail: f64,
    pub analytic_tail: f64,
    pub chi2: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Runs `paths` independent copies to time `s` and compares the empirical law
/// of Z_s with the closed form for counts 0..=max_count. The chi-square test
/// pools counts above `max_count`, and any bin expecting fewer than five
/// paths, into one tail bin.
pub fn compare_pmf(
    bp: &BranchingParams,
    s: f64,
    paths: u64,
    seed: u64,
    max_count: u64,
) -> Result<PmfComparison> {
    if paths == 0 {
        return Err(invalid("paths", "need at least one path"));
    }
    let law = bp.at(s)?;
    let bins = max_count as usize + 1;
    let mut hits = vec![0u64; bins];
    let mut adv_sum = vec![0u64; bins];
    let mut tail_hits = 0u64;
    let mut rng = seeded(seed);
    for _ in 0..paths {
        let end = simulate_bd_with(bp, s, &mut rng, false)?.final_state();
        let z = end.total() as usize;
        if z < bins {
            hits[z] += 1;
            adv_sum[z] += end.advanced;
        } else {
            tail_hits += 1;
        }
    }
    let n = paths as f64;
    let rows: Vec<PmfRow> = (0..bins)
        .map(|i| {
            let p = hits[i] as f64 / n;
            PmfRow {
                count: i as u64,
                analytic: law.pmf(i as u64),
                empirical: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                mean_advanced: if hits[i] > 0 {
                    adv_sum[i] as f64 / hits[i] as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    let head: f64 = rows.iter().map(|r| r.analytic).sum();
    let analytic_tail = (1.0 - head).max(0.0);

    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let (mut pooled_o, mut pooled_e) = (tail_hits as f64, analytic_tail * n);
    for (i, r) in rows.iter().enumerate() {
        let e = r.analytic * n;
        if e >= 5.0 {
            observed.push(hits[i] as f64);
            expected.push(e);
        } else {
            pooled_o += hits[i] as f64;
            pooled_e += e;
        }
    }
    if pooled_e > 0.0 {
        observed.push(pooled_o);
        expected.push(pooled_e);
    }
    let (chi2, dof, p_value) = stats::chi_square(&observed, &expected);
    Ok(PmfComparison {
        paths,
        rows,
        empirical_tail: tail_hits as f64 / n,
        analytic_tail,
        chi2,
        dof,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_advance_keeps_type0() {
        let bp = BranchingParams::new(2.0, 1.0, 0.0).unwrap();
        for seed in 0..200 {
            let path = simulate_bd(&bp, 1.5, seed).unwrap();
            assert!(path.points.iter().all(|p| p.advanced == 0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let bp = BranchingParams::new(2.0, 1.0, 0.5).unwrap();
        assert_eq!(simulate_bd(&bp, 2.0, 9).unwrap(), simulate_bd(&bp, 2.0, 9).unwrap());
    }

    #[test]
    fn path_times_increase_and_counts_step_by_one() {
        let bp = BranchingParams::new(1.5, 1.0, 0.3).unwrap();
        let path = simulate_bd(&bp, 3.0, 4).unwrap();
        for w in path.points.windows(2) {
            assert!(w[1].time >= w[0].time);
            let dz = w[1].total() as i64 - w[0].total() as i64;
            assert!(dz.abs() <= 1);
        }
    }

    #[test]
    fn extinction_frequency_matches_closed_form() {
        let bp = BranchingParams::new(2.0, 1.0, 0.0).unwrap();
        let cmp = compare_pmf(&bp, 1.0, 20_000, 17, 10).unwrap();
        let r0 = &cmp.rows[0];
        assert!((r0.empirical - r0.analytic).abs() < 3.0 * r0.std_error);
        assert!(cmp.p_value > 0.01, "p = {}", cmp.p_value);
    }
}
