use rand::Rng;
use rand_distr::Exp1;

use super::rates::{bundle, cross_pairs, pair_gap_sum};
use super::{Event, EventKind, LevelHistogram, ModelParams, RateBundle, TrajectorySample};
use crate::error::{invalid, Error, Result};
use crate::rng::{seeded, SimRng};

/// A single running instance of the fitness process.
///
/// Category totals are cached and refreshed in one O(L) pass after each event,
/// where L is the number of occupied levels.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: ModelParams,
    hist: LevelHistogram,
    time: f64,
    resampling: bool,
    cross: u128,
    gaps: u128,
    events: u64,
}

impl Simulator {
    /// Starts with every individual at level 0.
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let hist = LevelHistogram::uniform(0, params.n_individuals)?;
        Self::from_histogram(params, hist)
    }

    pub fn from_histogram(params: ModelParams, hist: LevelHistogram) -> Result<Self> {
        params.validate()?;
        hist.validate()?;
        if hist.total() != params.n_individuals {
            return Err(invalid(
                "hist",
                format!("histogram holds {} individuals, N = {}", hist.total(), params.n_individuals),
            ));
        }
        let cross = cross_pairs(&hist);
        let gaps = pair_gap_sum(&hist);
        Ok(Self {
            params,
            hist,
            time: 0.0,
            resampling: true,
            cross,
            gaps,
            events: 0,
        })
    }

    /// Test hook: switches the resampling mechanism off.
    pub fn without_resampling(mut self) -> Self {
        self.resampling = false;
        self
    }

    pub fn resampling(&self) -> bool {
        self.resampling
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn histogram(&self) -> &LevelHistogram {
        &self.hist
    }

    pub fn histogram_mut_tags(&mut self, level: i64, count: u64) -> Result<()> {
        self.hist.tag_lineage(level, count)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Moves the clock forward without an event. Valid because waiting
    /// times are memoryless.
    pub fn advance_to(&mut self, t: f64) {
        debug_assert!(t >= self.time);
        self.time = t;
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn rates(&self) -> RateBundle {
        bundle(&self.params, self.hist.total(), self.cross, self.gaps, self.resampling)
    }

    pub fn total_rate(&self) -> f64 {
        self.rates().total()
    }

    /// Draws the next waiting time and event, applies it, and returns it.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Event> {
        let wait = self.draw_wait(rng)?;
        let kind = self.sample_kind(rng)?;
        let time = self.time + wait;
        Ok(self.apply(kind, time, rng))
    }

    pub fn draw_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let total = self.total_rate();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::CorruptState(format!("total event rate {total}")));
        }
        let e: f64 = rng.sample(Exp1);
        Ok(e / total)
    }

    /// Picks the category proportionally to the cached totals, then the
    /// levels involved by two-stage inverse transform.
    pub fn sample_kind<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EventKind> {
        let r = self.rates();
        let total = r.total();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::CorruptState(format!("total event rate {total}")));
        }
        let u = rng.random::<f64>() * total;
        let kind = if u < r.mutation_total || (r.resample_total == 0.0 && r.selection_total == 0.0) {
            self.sample_mutation(rng)
        } else if (u < r.mutation_total + r.resample_total && r.resample_total > 0.0)
            || r.selection_total == 0.0
        {
            self.sample_resample(rng)
        } else {
            self.sample_selection(rng)
        };
        Ok(kind)
    }

    fn sample_mutation<R: Rng + ?Sized>(&self, rng: &mut R) -> EventKind {
        let mut x = rng.random_range(0..self.hist.total());
        let mut level = self.hist.max_fitness();
        for l in self.hist.levels() {
            if x < l.count {
                level = l.level;
                break;
            }
            x -= l.count;
        }
        if rng.random::<f64>() < self.params.beneficial_fraction {
            EventKind::BeneficialMutation(level)
        } else {
            EventKind::DeleteriousMutation(level)
        }
    }

    fn sample_resample<R: Rng + ?Sized>(&self, rng: &mut R) -> EventKind {
        let n = u128::from(self.hist.total());
        let levels = self.hist.levels();
        // Overwritten level a: weight counts(a)·(N − counts(a)).
        let mut x = rng.random_range(0..self.cross);
        let mut from = levels.len() - 1;
        for (i, l) in levels.iter().enumerate() {
            let w = u128::from(l.count) * (n - u128::from(l.count));
            if x < w {
                from = i;
                break;
            }
            x -= w;
        }
        // Parent level b ≠ a: weight counts(b).
        let mut y = rng.random_range(0..self.hist.total() - levels[from].count);
        let mut to = from;
        for (i, l) in levels.iter().enumerate() {
            if i == from {
                continue;
            }
            if y < l.count {
                to = i;
                break;
            }
            y -= l.count;
        }
        EventKind::Resample {
            from: levels[from].level,
            to: levels[to].level,
        }
    }

    fn sample_selection<R: Rng + ?Sized>(&self, rng: &mut R) -> EventKind {
        let levels = self.hist.levels();
        // Upper level b: weight counts(b)·(b·C_b − S_b).
        let mut x = rng.random_range(0..self.gaps);
        let mut prefix_count: i128 = 0;
        let mut prefix_moment: i128 = 0;
        let mut upper = levels.len() - 1;
        let mut upper_gap: i128 = 0;
        for (i, l) in levels.iter().enumerate() {
            let b = i128::from(l.level);
            let gap = b * prefix_count - prefix_moment;
            let w = (i128::from(l.count) * gap) as u128;
            if x < w {
                upper = i;
                upper_gap = gap;
                break;
            }
            x -= w;
            prefix_count += i128::from(l.count);
            prefix_moment += b * i128::from(l.count);
        }
        if upper_gap == 0 {
            // Fell through the scan; take the top level.
            let b = i128::from(levels[upper].level);
            upper_gap = levels[..upper]
                .iter()
                .map(|l| (b - i128::from(l.level)) * i128::from(l.count))
                .sum();
        }
        // Lower level a < b: weight (b − a)·counts(a).
        let b = levels[upper].level;
        let mut y = rng.random_range(0..upper_gap as u128);
        let mut lower = 0;
        for (i, l) in levels[..upper].iter().enumerate() {
            let w = ((b - l.level) as u128) * u128::from(l.count);
            if y < w {
                lower = i;
                break;
            }
            y -= w;
        }
        EventKind::Selection {
            from: levels[lower].level,
            to: b,
        }
    }

    /// Applies `kind` at `time`, moving exactly one individual and updating
    /// lineage tags when the overlay is active.
    pub fn apply<R: Rng + ?Sized>(&mut self, kind: EventKind, time: f64, rng: &mut R) -> Event {
        let from = kind.source_level();
        let to = kind.target_level();
        let (lose, gain) = if self.hist.is_tagging() {
            let draw = |rng: &mut R, level: i64, hist: &LevelHistogram| {
                let tagged = hist.tagged(level);
                tagged > 0 && rng.random_range(0..hist.count(level)) < tagged
            };
            match kind {
                EventKind::BeneficialMutation(_) | EventKind::DeleteriousMutation(_) => {
                    let carried = draw(rng, from, &self.hist);
                    (carried, carried)
                }
                EventKind::Resample { .. } | EventKind::Selection { .. } => {
                    let lose = draw(rng, from, &self.hist);
                    let gain = draw(rng, to, &self.hist);
                    (lose, gain)
                }
            }
        } else {
            (false, false)
        };
        let n_from = u128::from(self.hist.count(from));
        let n_to = u128::from(self.hist.count(to));
        self.hist.remove_one(from, lose);
        self.hist.add_one(to, gain);
        // Σ counts² after moving one individual from `from` to `to` (from ≠ to).
        let n = u128::from(self.hist.total());
        let sum_sq = n * n - self.cross;
        let sum_sq = sum_sq - (2 * n_from - 1) + (2 * n_to + 1);
        self.cross = n * n - sum_sq;
        self.gaps = pair_gap_sum(&self.hist);
        self.time = time;
        self.events += 1;
        Event { kind, time }
    }
}

/// Options for [`simulate_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulateOptions {
    pub keep_snapshots: bool,
    /// Abort with [`Error::EventBudget`] after this many events.
    pub max_events: Option<u64>,
}

/// Runs from the all-zero state to `horizon` and records observables at each
/// of `sample_times`. Deterministic in `seed`.
pub fn simulate(
    params: &ModelParams,
    horizon: f64,
    sample_times: &[f64],
    seed: u64,
) -> Result<Vec<TrajectorySample>> {
    simulate_with(params, horizon, sample_times, &mut seeded(seed), SimulateOptions::default())
}

pub fn simulate_with(
    params: &ModelParams,
    horizon: f64,
    sample_times: &[f64],
    rng: &mut SimRng,
    opts: SimulateOptions,
) -> Result<Vec<TrajectorySample>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive and finite"));
    }
    if sample_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("sample_times", "must be sorted"));
    }
    if sample_times.iter().any(|&s| !(0.0..=horizon).contains(&s)) {
        return Err(invalid("sample_times", "must lie within [0, horizon]"));
    }
    let mut sim = Simulator::new(*params)?;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut pending = sample_times.iter().copied().peekable();
    loop {
        let wait = sim.draw_wait(rng)?;
        let next = sim.time() + wait;
        while let Some(&s) = pending.peek() {
            if s < next {
                out.push(TrajectorySample::observe(s, sim.histogram(), opts.keep_snapshots));
                pending.next();
            } else {
                break;
            }
        }
        if next > horizon || pending.peek().is_none() {
            break;
        }
        if opts.max_events.is_some_and(|m| sim.events() >= m) {
            return Err(Error::EventBudget(sim.events()));
        }
        let kind = sim.sample_kind(rng)?;
        sim.apply(kind, next, rng);
    }
    Ok(out)
}
