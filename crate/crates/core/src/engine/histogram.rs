use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One occupied fitness level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelCount {
    pub level: i64,
    pub count: u64,
    /// Individuals at this level carrying the lineage tag. Always zero unless
    /// the overlay is active.
    pub tagged: u64,
}

/// Exchangeable population state: occupied levels in ascending order with
/// their occupancy. Empty levels are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelHistogram {
    levels: Vec<LevelCount>,
    total: u64,
    tagging: bool,
}

/// Serialized form of a histogram at a point in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSnapshot {
    pub t: f64,
    pub levels: Vec<(i64, u64)>,
}

impl LevelHistogram {
    /// All `n` individuals at `level`.
    pub fn uniform(level: i64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n_individuals", "population must be nonempty"));
        }
        Ok(Self {
            levels: vec![LevelCount {
                level,
                count: n,
                tagged: 0,
            }],
            total: n,
            tagging: false,
        })
    }

    /// Builds a histogram from `(level, count)` pairs. Zero counts are
    /// dropped; duplicate levels are rejected.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, u64)>,
    {
        let mut levels: Vec<LevelCount> = pairs
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(level, count)| LevelCount {
                level,
                count,
                tagged: 0,
            })
            .collect();
        levels.sort_by_key(|l| l.level);
        if levels.windows(2).any(|w| w[0].level == w[1].level) {
            return Err(invalid("levels", "duplicate fitness level"));
        }
        let total = levels.iter().map(|l| l.count).sum();
        if total == 0 {
            return Err(invalid("levels", "population must be nonempty"));
        }
        Ok(Self {
            levels,
            total,
            tagging: false,
        })
    }

    pub fn levels(&self) -> &[LevelCount] {
        &self.levels
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn occupied(&self) -> usize {
        self.levels.len()
    }

    pub fn is_tagging(&self) -> bool {
        self.tagging
    }

    fn index_of(&self, level: i64) -> std::result::Result<usize, usize> {
        self.levels.binary_search_by_key(&level, |l| l.level)
    }

    pub fn count(&self, level: i64) -> u64 {
        self.index_of(level).map_or(0, |i| self.levels[i].count)
    }

    pub fn tagged(&self, level: i64) -> u64 {
        self.index_of(level).map_or(0, |i| self.levels[i].tagged)
    }

    pub fn tagged_total(&self) -> u64 {
        self.levels.iter().map(|l| l.tagged).sum()
    }

    /// Activates the lineage overlay with `count` tagged individuals at
    /// `level`. Existing tags elsewhere are kept.
    pub fn tag_lineage(&mut self, level: i64, count: u64) -> Result<()> {
        let occupancy = self.count(level);
        if count > occupancy {
            return Err(invalid(
                "count",
                format!("cannot tag {count} individuals at level {level} holding {occupancy}"),
            ));
        }
        self.tagging = true;
        if let Ok(i) = self.index_of(level) {
            self.levels[i].tagged = count;
        }
        Ok(())
    }

    pub fn clear_tags(&mut self) {
        self.tagging = false;
        for l in &mut self.levels {
            l.tagged = 0;
        }
    }

    pub(crate) fn remove_one(&mut self, level: i64, tagged: bool) {
        let i = self
            .index_of(level)
            .expect("removing an individual from an empty level");
        let slot = &mut self.levels[i];
        slot.count -= 1;
        if tagged {
            slot.tagged -= 1;
        }
        if slot.count == 0 {
            self.levels.remove(i);
        }
        self.total -= 1;
    }

    pub(crate) fn add_one(&mut self, level: i64, tagged: bool) {
        let t = u64::from(tagged);
        match self.index_of(level) {
            Ok(i) => {
                self.levels[i].count += 1;
                self.levels[i].tagged += t;
            }
            Err(i) => self.levels.insert(
                i,
                LevelCount {
                    level,
                    count: 1,
                    tagged: t,
                },
            ),
        }
        self.total += 1;
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.levels.iter().map(|l| l.count).sum();
        if sum != self.total {
            return Err(Error::CorruptState(format!(
                "counts sum to {sum}, cached total {}",
                self.total
            )));
        }
        if self.levels.windows(2).any(|w| w[0].level >= w[1].level) {
            return Err(Error::CorruptState("levels out of order".into()));
        }
        if let Some(l) = self.levels.iter().find(|l| l.count == 0) {
            return Err(Error::CorruptState(format!("empty level {} stored", l.level)));
        }
        if let Some(l) = self.levels.iter().find(|l| l.tagged > l.count) {
            return Err(Error::CorruptState(format!(
                "level {} has {} tagged of {}",
                l.level, l.tagged, l.count
            )));
        }
        Ok(())
    }

    pub fn sum_sq_counts(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| u128::from(l.count) * u128::from(l.count))
            .sum()
    }

    pub fn mean_fitness(&self) -> f64 {
        let s: i128 = self
            .levels
            .iter()
            .map(|l| i128::from(l.level) * i128::from(l.count))
            .sum();
        s as f64 / self.total as f64
    }

    /// c₂: population variance of the fitness values.
    pub fn centered_variance(&self) -> f64 {
        let n = self.total as i128;
        let (s1, s2) = self.levels.iter().fold((0i128, 0i128), |(a, b), l| {
            let x = i128::from(l.level);
            let c = i128::from(l.count);
            (a + x * c, b + x * x * c)
        });
        // N·Σx² − (Σx)² is an exact integer.
        (n * s2 - s1 * s1) as f64 / (n * n) as f64
    }

    pub fn max_fitness(&self) -> i64 {
        self.levels.last().expect("nonempty").level
    }

    pub fn min_fitness(&self) -> i64 {
        self.levels.first().expect("nonempty").level
    }

    /// W: the level k with at least N/2 individuals in [k, ∞) and fewer than
    /// N/2 in (k, ∞).
    pub fn median_level(&self) -> i64 {
        let mut above = 0u64;
        for l in self.levels.iter().rev() {
            above += l.count;
            if 2 * above >= self.total {
                return l.level;
            }
        }
        unreachable!("cumulative count reaches N")
    }

    pub fn snapshot(&self, t: f64) -> HistogramSnapshot {
        HistogramSnapshot {
            t,
            levels: self.levels.iter().map(|l| (l.level, l.count)).collect(),
        }
    }

    /// Expands to an explicit fitness vector, lowest levels first.
    pub fn expand(&self) -> Vec<i64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.level, l.count as usize))
            .collect()
    }
}
