use super::{LevelHistogram, ModelParams};

/// Total event rate per category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBundle {
    pub mutation_total: f64,
    pub resample_total: f64,
    pub selection_total: f64,
}

impl RateBundle {
    pub fn total(&self) -> f64 {
        self.mutation_total + self.resample_total + self.selection_total
    }
}

/// Number of ordered cross-level pairs: N² − Σ counts².
pub(crate) fn cross_pairs(hist: &LevelHistogram) -> u128 {
    let n = u128::from(hist.total());
    n * n - hist.sum_sq_counts()
}

/// Σ over level pairs a < b of (b − a)·counts(a)·counts(b), accumulated in one
/// ascending pass with prefix count C and prefix moment S.
pub(crate) fn pair_gap_sum(hist: &LevelHistogram) -> u128 {
    let mut prefix_count: i128 = 0;
    let mut prefix_moment: i128 = 0;
    let mut acc: i128 = 0;
    for l in hist.levels() {
        let b = i128::from(l.level);
        let c = i128::from(l.count);
        acc += c * (b * prefix_count - prefix_moment);
        prefix_count += c;
        prefix_moment += b * c;
    }
    acc as u128
}

pub(crate) fn bundle(params: &ModelParams, n: u64, cross: u128, gaps: u128, resampling: bool) -> RateBundle {
    let n = n as f64;
    RateBundle {
        mutation_total: n * params.mutation_rate,
        resample_total: if resampling { cross as f64 / n } else { 0.0 },
        selection_total: params.selection_strength / n * gaps as f64,
    }
}

/// Category totals for `hist` under `params`. Same-level resampling is
/// excluded since it leaves the state unchanged.
pub fn total_rates(hist: &LevelHistogram, params: &ModelParams) -> RateBundle {
    bundle(params, hist.total(), cross_pairs(hist), pair_gap_sum(hist), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: u64, gamma: f64) -> ModelParams {
        ModelParams::new(n, 1.0, 1.0, gamma).unwrap()
    }

    /// Rates summed over every ordered index pair of the expanded vector.
    fn brute(hist: &LevelHistogram, p: &ModelParams) -> (f64, f64) {
        let v = hist.expand();
        let n = v.len() as f64;
        let (mut res, mut sel) = (0.0, 0.0);
        for (i, &xi) in v.iter().enumerate() {
            for (j, &xj) in v.iter().enumerate() {
                if i != j && xi != xj {
                    res += 1.0 / n;
                }
                sel += p.selection_strength / n * ((xj - xi).max(0) as f64);
            }
        }
        (res, sel)
    }

    #[test]
    fn single_level_has_no_pair_rates() {
        let h = LevelHistogram::uniform(0, 50).unwrap();
        let r = total_rates(&h, &params(50, 3.0));
        assert_eq!(r.selection_total, 0.0);
        assert_eq!(r.resample_total, 0.0);
        assert_eq!(r.mutation_total, 50.0);
    }

    #[test]
    fn two_individuals_gap_three() {
        let h = LevelHistogram::from_counts([(0, 1), (3, 1)]).unwrap();
        let p = params(2, 2.0);
        let r = total_rates(&h, &p);
        assert_eq!(r.selection_total, 3.0);
        assert_eq!(brute(&h, &p).1, 3.0);
    }

    #[test]
    fn resample_cross_pairs() {
        let h = LevelHistogram::from_counts([(0, 2), (1, 2)]).unwrap();
        let p = params(4, 1.0);
        assert_eq!(total_rates(&h, &p).resample_total, 2.0);
        assert_eq!(brute(&h, &p).0, 2.0);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            counts in proptest::collection::btree_map(-6i64..6, 1u64..5, 1..5),
            gamma in 0.0f64..4.0,
        ) {
            let h = LevelHistogram::from_counts(counts).unwrap();
            let n = h.total();
            prop_assume!(n >= 2);
            let p = params(n, gamma);
            let r = total_rates(&h, &p);
            let (res, sel) = brute(&h, &p);
            prop_assert!((r.resample_total - res).abs() < 1e-9);
            prop_assert!((r.selection_total - sel).abs() < 1e-9 * (1.0 + sel));
        }
    }
}
