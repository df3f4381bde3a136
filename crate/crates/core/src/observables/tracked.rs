use rand::Rng;
use rand_distr::Exp1;

use super::{labels_at, DeathMarkSeries, Mark, MarkSource, PathPoint, Role, TopLabels, Trajectory};
use crate::engine::{EventKind, LevelHistogram, ModelParams, Simulator, TrajectorySample};
use crate::error::{invalid, Error, Result};
use crate::rng::{seeded, SimRng};

/// Options for [`run_tracked`].
#[derive(Debug, Clone)]
pub struct TrackOptions {
    /// Test hook; `false` disables the resampling mechanism.
    pub resampling: bool,
    /// Add the auxiliary stream that brings each tracked mark rate up to d.
    pub pad_to_d: bool,
    pub sample_times: Vec<f64>,
    pub keep_snapshots: bool,
    pub max_events: Option<u64>,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            resampling: true,
            pad_to_d: true,
            sample_times: Vec::new(),
            keep_snapshots: false,
            max_events: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrackedRun {
    /// Exact path of (X⁺, W) over [0, horizon].
    pub trajectory: Trajectory,
    pub marks: DeathMarkSeries,
    /// Labels at each refresh time s_i < horizon.
    pub labels: Vec<TopLabels>,
    pub samples: Vec<TrajectorySample>,
    pub events: u64,
    pub final_histogram: LevelHistogram,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy)]
struct Tracked {
    role: Role,
    level: i64,
}

struct Tracker {
    ids: [Tracked; 2],
    n: f64,
    resampling: bool,
    pad: f64,
}

impl Tracker {
    fn refresh(&mut self, labels: &TopLabels) {
        self.ids = [
            Tracked {
                role: Role::Alpha,
                level: labels.alpha_level,
            },
            Tracked {
                role: Role::Beta,
                level: labels.beta_level,
            },
        ];
    }

    /// Rate of same-level resampling deaths for a tracked individual.
    fn phantom(&self, hist: &LevelHistogram, level: i64) -> f64 {
        if self.resampling {
            (hist.count(level) - 1) as f64 / self.n
        } else {
            0.0
        }
    }

    fn extra_rates(&self, hist: &LevelHistogram) -> [f64; 2] {
        self.ids.map(|t| self.phantom(hist, t.level) + self.pad)
    }

    /// Decides whether the individual moved by `kind` is one of the tracked
    /// ones and updates it. Returns the mark, if any.
    fn on_event<R: Rng + ?Sized>(
        &mut self,
        kind: EventKind,
        hist: &LevelHistogram,
        time: f64,
        rng: &mut R,
    ) -> Option<Mark> {
        let from = kind.source_level();
        let here: Vec<usize> = (0..2).filter(|&i| self.ids[i].level == from).collect();
        if here.is_empty() {
            return None;
        }
        let u = rng.random_range(0..hist.count(from)) as usize;
        let idx = *here.get(u)?;
        self.ids[idx].level = kind.target_level();
        let source = match kind {
            EventKind::DeleteriousMutation(_) => MarkSource::Deleterious,
            EventKind::Resample { .. } => MarkSource::ResampleDeath,
            _ => return None,
        };
        Some(Mark {
            time,
            role: self.ids[idx].role,
            source,
        })
    }
}

/// Runs the engine from the all-zero state to `horizon` while following α(i)
/// and β(i), relabelled at every grid time. Each tracked individual is marked
/// at deleterious mutations and resampling deaths (same-level parents
/// included); with `pad_to_d` an independent stream of rate
/// d − (1−q)μ − (N−1)/N is added, so the marks of each role form a Poisson
/// process of rate exactly d.
pub fn run_tracked(
    params: &ModelParams,
    horizon: f64,
    grid: &[f64],
    opts: &TrackOptions,
    rng: &mut SimRng,
) -> Result<TrackedRun> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive and finite"));
    }
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "must start at 0 and increase strictly"));
    }
    let samples_sorted = opts.sample_times.windows(2).all(|w| w[0] <= w[1]);
    if !samples_sorted || opts.sample_times.iter().any(|&s| !(0.0..=horizon).contains(&s)) {
        return Err(invalid("sample_times", "must be sorted within [0, horizon]"));
    }
    let mut sim = Simulator::new(*params)?;
    if !opts.resampling {
        sim = sim.without_resampling();
    }
    let n = params.n_individuals as f64;
    let q = params.beneficial_fraction;
    let mu = params.mutation_rate;
    let hazard = (1.0 - q) * mu + if opts.resampling { (n - 1.0) / n } else { 0.0 };
    let pad = if opts.pad_to_d {
        (params.death_rate() - hazard).max(0.0)
    } else {
        0.0
    };
    let first = labels_at(sim.histogram());
    let mut tracker = Tracker {
        ids: [Tracked {
            role: Role::Alpha,
            level: 0,
        }; 2],
        n,
        resampling: opts.resampling,
        pad,
    };
    tracker.refresh(&first);
    let mut labels = vec![first];
    let mut marks = Vec::new();
    let mut samples = Vec::with_capacity(opts.sample_times.len());
    let mut pending = opts.sample_times.iter().copied().peekable();
    let mut refresh = grid[1..].iter().copied().filter(|&s| s < horizon).peekable();
    let h = sim.histogram();
    let mut path = Trajectory::starting_at(PathPoint::new(0.0, h.max_fitness(), h.median_level()));

    loop {
        let engine_rate = sim.total_rate();
        let extra = tracker.extra_rates(sim.histogram());
        let total = engine_rate + extra[0] + extra[1];
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::CorruptState(format!("total event rate {total}")));
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        let next = sim.time() + wait;
        let cut = refresh.peek().copied().unwrap_or(f64::INFINITY).min(horizon);
        while let Some(&s) = pending.peek() {
            if s < next.min(cut) || (s == cut && cut < next) {
                samples.push(TrajectorySample::observe(s, sim.histogram(), opts.keep_snapshots));
                pending.next();
            } else {
                break;
            }
        }
        if next >= cut {
            // Memorylessness lets the clock restart at the cut.
            sim.advance_to(cut);
            if cut >= horizon {
                break;
            }
            refresh.next();
            let l = labels_at(sim.histogram());
            tracker.refresh(&l);
            labels.push(l);
            continue;
        }
        if opts.max_events.is_some_and(|m| sim.events() >= m) {
            return Err(Error::EventBudget(sim.events()));
        }
        let u = rng.random::<f64>() * total;
        if u < engine_rate {
            let kind = sim.sample_kind(rng)?;
            if let Some(mark) = tracker.on_event(kind, sim.histogram(), next, rng) {
                marks.push(mark);
            }
            sim.apply(kind, next, rng);
            let h = sim.histogram();
            path.record(next, h.max_fitness(), h.median_level());
        } else {
            let idx = usize::from(u >= engine_rate + extra[0]);
            let t = tracker.ids[idx];
            let phantom = tracker.phantom(sim.histogram(), t.level);
            let source = if rng.random::<f64>() * extra[idx] < phantom {
                MarkSource::ResampleDeath
            } else {
                MarkSource::Auxiliary
            };
            marks.push(Mark {
                time: next,
                role: t.role,
                source,
            });
            sim.advance_to(next);
        }
    }
    path.extend_to(horizon);
    for s in pending {
        samples.push(TrajectorySample::observe(s, sim.histogram(), opts.keep_snapshots));
    }
    Ok(TrackedRun {
        trajectory: path,
        marks: DeathMarkSeries { marks },
        labels,
        samples,
        events: sim.events(),
        final_histogram: sim.histogram().clone(),
        horizon,
    })
}

/// Tracked run with default options; deterministic in `seed`.
pub fn track_death_marks(
    params: &ModelParams,
    horizon: f64,
    grid: &[f64],
    seed: u64,
) -> Result<(Trajectory, DeathMarkSeries)> {
    let run = run_tracked(params, horizon, grid, &TrackOptions::default(), &mut seeded(seed))?;
    Ok((run.trajectory, run.marks))
}
