//! Trajectory functionals built on the block grid s_i = 2i𝒯: labels of the
//! fittest and second-fittest individuals, their death marks, Λ_K membership,
//! the Φ/Θ selection sums, stopping times and the barrier event ℰ.

mod asymptotics;
mod path;
mod tracked;

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::branching::ScalingConstants;
use crate::engine::LevelHistogram;
use crate::error::{invalid, Result};

pub use asymptotics::{
    asymptotic_row, lemma4_diagnostics, lemma5_diagnostics, AsymptoticReport, Diagnostic,
};
pub use path::{event_e_for, event_e_indicator, stopping_time_tau, PathPoint, Trajectory};
pub use tracked::{run_tracked, track_death_marks, TrackOptions, TrackedRun};

/// Fitness levels of α(i) (a fittest individual) and β(i) (the best of the
/// rest). Under exchangeability the index tie-break only picks an arbitrary
/// representative, so levels are all that is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopLabels {
    pub alpha_level: i64,
    pub beta_level: i64,
    pub top_multiplicity: u64,
}

pub fn labels_at(hist: &LevelHistogram) -> TopLabels {
    let levels = hist.levels();
    let top = levels[levels.len() - 1];
    let beta_level = if top.count >= 2 {
        top.level
    } else {
        levels[levels.len() - 2].level
    };
    TopLabels {
        alpha_level: top.level,
        beta_level,
        top_multiplicity: top.count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Alpha,
    Beta,
}

/// Why a tracked individual was marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkSource {
    Deleterious,
    /// Overwritten by resampling, including by a same-level parent.
    ResampleDeath,
    /// Independent filler that tops the mark rate up to exactly d.
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mark {
    pub time: f64,
    pub role: Role,
    pub source: MarkSource,
}

/// Union of the α and β mark processes, in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeathMarkSeries {
    pub marks: Vec<Mark>,
}

impl DeathMarkSeries {
    pub fn from_times(times: &[f64]) -> Self {
        Self {
            marks: times
                .iter()
                .map(|&time| Mark {
                    time,
                    role: Role::Alpha,
                    source: MarkSource::Auxiliary,
                })
                .collect(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.marks.iter().map(|m| m.time).collect()
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn count_in(&self, from: f64, to: f64, closed_right: bool) -> usize {
        self.marks
            .iter()
            .filter(|m| m.time >= from && (m.time < to || (closed_right && m.time == to)))
            .count()
    }

    pub fn count_source(&self, source: MarkSource) -> usize {
        self.marks.iter().filter(|m| m.source == source).count()
    }
}

impl Serialize for DeathMarkSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.marks.len()))?;
        for m in &self.marks {
            seq.serialize_element(&m.time)?;
        }
        seq.end()
    }
}

/// Λ_K: at most K marks in [0, s_{M+1}], none in [0, s_1], and at most one in
/// each [s_i, s_{i+1}) for 1 ≤ i ≤ M.
pub fn lambda_k_member(marks: &DeathMarkSeries, constants: &ScalingConstants, k: u64) -> bool {
    let m = constants.m_steps;
    if marks.count_in(0.0, constants.grid_end(), true) as u64 > k {
        return false;
    }
    if marks.count_in(0.0, constants.s(1), true) > 0 {
        return false;
    }
    (1..=m).all(|i| marks.count_in(constants.s(i), constants.s(i + 1), false) <= 1)
}

/// Π_{i=1}^{k} (t + 1 − 2i𝒯)/(t + 1), the chance that k uniform points on
/// [0, t+1] avoid [0, s_1] and each other's blocks.
pub fn prop1_product(horizon: f64, big_t: f64, k: u64) -> Result<f64> {
    let span = horizon + 1.0;
    if 2.0 * k as f64 * big_t >= span {
        return Err(invalid("k", "2k𝒯 ≥ t + 1 makes the bound vacuous"));
    }
    Ok((1..=k).map(|i| (span - 2.0 * i as f64 * big_t) / span).product())
}

/// Lower bound on P(𝒫 ∈ Λ_K | 𝒫[0, t+1] = k) for k ≤ K.
pub fn prop1_bound(constants: &ScalingConstants, cap: u64, k: u64) -> Result<f64> {
    if k > cap {
        return Err(invalid("k", "realized count exceeds K"));
    }
    prop1_product(constants.horizon, constants.big_t, k)
}

/// Φ and Θ for an individual at level j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiTheta {
    /// Σ_k (j − X^k)⁺.
    pub phi: f64,
    /// The part of Φ from gaps of at least 𝒲.
    pub theta: f64,
    /// At least N/2 individuals sit at or below j − 𝒲.
    pub premise: bool,
    /// Θ ≥ N𝒲/2.
    pub bound_holds: bool,
}

pub fn phi_theta(hist: &LevelHistogram, j: i64, big_w: f64) -> PhiTheta {
    let (mut phi, mut theta, mut far) = (0.0, 0.0, 0u64);
    for l in hist.levels() {
        let gap = (j - l.level) as f64;
        if gap > 0.0 {
            phi += gap * l.count as f64;
        }
        if gap >= big_w && gap > 0.0 {
            theta += gap * l.count as f64;
            far += l.count;
        }
    }
    let n = hist.total() as f64;
    PhiTheta {
        phi,
        theta,
        premise: 2 * far >= hist.total(),
        bound_holds: theta >= n * big_w / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::RateParams;
    use proptest::prelude::*;

    fn h(pairs: &[(i64, u64)]) -> LevelHistogram {
        LevelHistogram::from_counts(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn labels() {
        let l = labels_at(&h(&[(0, 2), (3, 2)]));
        assert_eq!((l.alpha_level, l.beta_level, l.top_multiplicity), (3, 3, 2));
        let l = labels_at(&h(&[(0, 3), (3, 1)]));
        assert_eq!((l.alpha_level, l.beta_level), (3, 0));
        let l = labels_at(&LevelHistogram::uniform(5, 9).unwrap());
        assert_eq!((l.alpha_level, l.beta_level), (5, 5));
    }

    proptest! {
        #[test]
        fn labels_match_argmax(counts in proptest::collection::btree_map(-5i64..8, 1u64..4, 1..6)) {
            let hist = LevelHistogram::from_counts(counts).unwrap();
            prop_assume!(hist.total() >= 2);
            let mut v = hist.expand();
            let alpha_idx = (0..v.len()).max_by_key(|&i| (v[i], std::cmp::Reverse(i))).unwrap();
            let alpha = v.remove(alpha_idx);
            let beta = *v.iter().max().unwrap();
            let l = labels_at(&hist);
            prop_assert_eq!(l.alpha_level, alpha);
            prop_assert_eq!(l.beta_level, beta);
        }

        #[test]
        fn lambda_monotone_in_k(times in proptest::collection::vec(0.0f64..3.0, 0..8), k in 0u64..8) {
            let mut times = times;
            times.sort_by(f64::total_cmp);
            let c = constants(1.0, 0.05);
            let marks = DeathMarkSeries::from_times(&times);
            if lambda_k_member(&marks, &c, k) {
                prop_assert!(lambda_k_member(&marks, &c, k + 1));
            }
        }

        #[test]
        fn theta_bounds(counts in proptest::collection::btree_map(-5i64..8, 1u64..4, 1..6), j in -3i64..10, w in 0.0f64..6.0) {
            let hist = LevelHistogram::from_counts(counts).unwrap();
            let pt = phi_theta(&hist, j, w);
            prop_assert!(pt.theta >= 0.0 && pt.theta <= pt.phi);
            if pt.premise {
                prop_assert!(pt.bound_holds);
            }
        }
    }

    /// Constants with a prescribed 𝒯, built by solving for the matching γ.
    fn constants(horizon: f64, big_t: f64) -> ScalingConstants {
        let log_n = 1e3f64;
        let l = log_n.ln();
        let gamma = 16.0 * l * l / (big_t * log_n);
        let c = ScalingConstants::from_log_n(log_n, RateParams::new(1.0, 1.0, gamma).unwrap(), horizon).unwrap();
        assert!((c.big_t - big_t).abs() < 1e-12);
        c
    }

    #[test]
    fn lambda_examples() {
        let c = constants(1.0, 0.05);
        let empty = DeathMarkSeries::default();
        for k in 0..4 {
            assert!(lambda_k_member(&empty, &c, k));
        }
        let early = DeathMarkSeries::from_times(&[0.05]);
        assert!(!lambda_k_member(&early, &c, 100));
        let (s3, s4) = (c.s(3), c.s(4));
        let crowded = DeathMarkSeries::from_times(&[s3 + 0.01, s4 - 0.01]);
        assert!(!lambda_k_member(&crowded, &c, 100));
        let spread = DeathMarkSeries::from_times(&[s3 + 0.01, s4 + 0.01]);
        assert!(lambda_k_member(&spread, &c, 2));
        assert!(!lambda_k_member(&spread, &c, 1));
    }

    #[test]
    fn prop1_examples() {
        assert_eq!(prop1_product(1.0, 0.05, 0).unwrap(), 1.0);
        let b = prop1_product(1.0, 0.05, 2).unwrap();
        assert!((b - 0.855).abs() < 1e-15);
        assert!(prop1_product(1.0, 0.5, 2).is_err());
        let c = constants(1.0, 0.05);
        assert!(prop1_bound(&c, 1, 2).is_err());
        // Shrinking 𝒯 drives the bound to one.
        let bounds: Vec<f64> = [0.1, 0.01, 0.001, 0.0001]
            .iter()
            .map(|&t| prop1_product(1.0, t, 3).unwrap())
            .collect();
        assert!(bounds.windows(2).all(|w| w[1] > w[0]));
        assert!(1.0 - bounds[3] < 1e-3);
    }

    #[test]
    fn phi_theta_examples() {
        let all = phi_theta(&LevelHistogram::uniform(3, 4).unwrap(), 3, 2.0);
        assert_eq!((all.phi, all.theta), (0.0, 0.0));
        let a = phi_theta(&h(&[(0, 2), (3, 2)]), 3, 2.0);
        assert_eq!((a.phi, a.theta), (6.0, 6.0));
        let b = phi_theta(&h(&[(0, 2), (2, 1), (3, 1)]), 3, 2.0);
        assert_eq!((b.phi, b.theta), (7.0, 6.0));
        assert!(b.premise && b.bound_holds);
    }

    #[test]
    fn marks_serialize_as_times() {
        let m = DeathMarkSeries::from_times(&[0.5, 1.25]);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[0.5,1.25]");
    }
}
