use crate::branching::ScalingConstants;
use crate::error::{invalid, Error, Result};

/// State of the piecewise-constant observables from `time` until the next point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub time: f64,
    pub max_fitness: i64,
    pub median_level: i64,
}

impl PathPoint {
    pub fn new(time: f64, max_fitness: i64, median_level: i64) -> Self {
        Self {
            time,
            max_fitness,
            median_level,
        }
    }

    pub fn t(&self) -> f64 {
        self.time
    }
}

/// Exact record of X⁺ and W on [start, end]: a new point is stored only when
/// one of them changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<PathPoint>,
    end: f64,
}

impl Trajectory {
    pub fn starting_at(first: PathPoint) -> Self {
        Self {
            end: first.time,
            points: vec![first],
        }
    }

    /// Builds a path from explicit pieces; times must be strictly increasing
    /// and not exceed `end`.
    pub fn from_points(points: Vec<PathPoint>, end: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("points", "a path needs at least one point"));
        }
        if points.windows(2).any(|w| w[1].t() <= w[0].t()) {
            return Err(invalid("points", "times must be strictly increasing"));
        }
        if points.last().is_some_and(|p| p.t() > end) {
            return Err(invalid("end", "path ends before its last point"));
        }
        Ok(Self {
            points,
            end,
        })
    }

    /// Records the state from `time` on, if it differs from the current one.
    pub fn record(&mut self, time: f64, max_fitness: i64, median_level: i64) {
        let last = self.points.last().expect("nonempty");
        if last.max_fitness != max_fitness || last.median_level != median_level {
            if last.t() == time {
                self.points.pop();
            }
            self.points.push(PathPoint::new(time, max_fitness, median_level));
        }
        self.extend_to(time);
    }

    pub fn extend_to(&mut self, time: f64) {
        if time > self.end {
            self.end = time;
        }
    }

    pub fn points(&self) -> &[PathPoint] {
        &self.points
    }

    pub fn start(&self) -> f64 {
        self.points[0].t()
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Pieces as (from, to, point), with `to` the next change or the end.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &PathPoint)> + '_ {
        self.points.iter().enumerate().map(move |(i, p)| {
            let to = self.points.get(i + 1).map_or(self.end, PathPoint::t);
            (p.t(), to, p)
        })
    }

    pub fn at(&self, t: f64) -> &PathPoint {
        let idx = self.points.partition_point(|p| p.t() <= t);
        &self.points[idx.saturating_sub(1)]
    }

    fn require(&self, from: f64, to: f64) -> Result<()> {
        if self.start() > from || self.end() < to {
            return Err(Error::Coverage { from, to });
        }
        Ok(())
    }
}

/// τ(i): first time in [s_i, s_{i+1}] at which `beta_level − W_s < 𝒲`.
pub fn stopping_time_tau(
    path: &Trajectory,
    constants: &ScalingConstants,
    i: u64,
    beta_level: i64,
) -> Result<Option<f64>> {
    let (from, to) = (constants.s(i), constants.s(i + 1));
    path.require(from, to)?;
    let closes = |p: &PathPoint| ((beta_level - p.median_level) as f64) < constants.big_w;
    if closes(path.at(from)) {
        return Ok(Some(from));
    }
    Ok(path
        .points()
        .iter()
        .filter(|p| p.t() > from && p.t() <= to)
        .find(|p| closes(p))
        .map(PathPoint::t))
}

/// ℰ: X⁺_s ≥ M·s/2 for every s in [𝒯, t].
///
/// X⁺ is piecewise constant and the barrier increases, so each piece only
/// needs checking at its right end (the supremum of the piece).
pub fn event_e_indicator(path: &Trajectory, big_t: f64, m: u64, t: f64) -> Result<bool> {
    if big_t > t {
        return Ok(true);
    }
    path.require(big_t, t)?;
    let slope = m as f64 / 2.0;
    for (from, to, p) in path.pieces() {
        if to < big_t || from > t {
            continue;
        }
        let right = to.min(t);
        if (p.max_fitness as f64) < slope * right {
            return Ok(false);
        }
    }
    Ok(true)
}

/// ℰ at the constants' own 𝒯, horizon and M, unless `m_override` is given.
pub fn event_e_for(path: &Trajectory, constants: &ScalingConstants, m_override: Option<u64>) -> Result<bool> {
    event_e_indicator(
        path,
        constants.big_t,
        m_override.unwrap_or(constants.m_steps),
        constants.horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::RateParams;

    fn flat(max: i64, median: i64, end: f64) -> Trajectory {
        Trajectory::from_points(vec![PathPoint::new(0.0, max, median)], end).unwrap()
    }

    fn constants() -> ScalingConstants {
        ScalingConstants::from_log_n(50.0, RateParams::new(1.0, 1.0, 1.0).unwrap(), 10.0).unwrap()
    }

    #[test]
    fn barrier_examples() {
        assert!(event_e_indicator(&flat(0, 0, 5.0), 0.5, 0, 5.0).unwrap());
        assert!(event_e_indicator(&flat(10, 0, 5.0), 0.5, 2, 5.0).unwrap());
        assert!(!event_e_indicator(&flat(1, 0, 5.0), 0.5, 2, 5.0).unwrap());
        assert!(event_e_indicator(&flat(1, 0, 5.0), 0.5, 2, 1.0).unwrap());
    }

    #[test]
    fn barrier_checks_right_ends() {
        // X⁺ = 1 on [0, 2), 4 on [2, 5]; barrier s (M = 2).
        let p = Trajectory::from_points(vec![PathPoint::new(0.0, 1, 0), PathPoint::new(2.0, 4, 0)], 5.0).unwrap();
        // Fails just before 2 since 1 < s there.
        assert!(!event_e_indicator(&p, 0.5, 2, 3.0).unwrap());
        assert!(event_e_indicator(&p, 0.5, 1, 3.0).unwrap());
        let p = Trajectory::from_points(vec![PathPoint::new(0.0, 2, 0), PathPoint::new(2.0, 4, 0)], 5.0).unwrap();
        assert!(event_e_indicator(&p, 0.5, 2, 4.0).unwrap());
        assert!(!event_e_indicator(&p, 0.5, 2, 4.5).unwrap());
    }

    #[test]
    fn barrier_antitone_in_m() {
        let p = Trajectory::from_points(
            vec![PathPoint::new(0.0, 0, 0), PathPoint::new(1.0, 3, 0), PathPoint::new(2.5, 7, 1)],
            6.0,
        )
        .unwrap();
        let flags: Vec<bool> = (0..6).map(|m| event_e_indicator(&p, 0.5, m, 6.0).unwrap()).collect();
        for w in flags.windows(2) {
            assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn coverage_enforced() {
        let p = Trajectory::from_points(vec![PathPoint::new(1.0, 0, 0)], 2.0).unwrap();
        assert!(event_e_indicator(&p, 0.5, 1, 2.0).is_err());
        assert!(event_e_indicator(&p, 1.5, 1, 3.0).is_err());
    }

    #[test]
    fn tau_constant_population() {
        let c = constants();
        let p = flat(4, 4, c.grid_end());
        assert_eq!(stopping_time_tau(&p, &c, 1, 4).unwrap(), Some(c.s(1)));
    }

    #[test]
    fn tau_never_when_gap_stays_wide() {
        let c = constants();
        let beta = (2.0 * c.big_w).ceil() as i64 + 1;
        let p = flat(beta, 0, c.grid_end());
        assert_eq!(stopping_time_tau(&p, &c, 0, beta).unwrap(), None);
    }

    #[test]
    fn tau_at_median_jump() {
        let c = constants();
        let beta = c.big_w.ceil() as i64 + 3;
        let u = c.s(1) + 0.3 * c.big_t;
        let p = Trajectory::from_points(
            vec![PathPoint::new(0.0, beta, 0), PathPoint::new(u, beta, beta - 1)],
            c.grid_end(),
        )
        .unwrap();
        assert_eq!(stopping_time_tau(&p, &c, 1, beta).unwrap(), Some(u));
    }

    #[test]
    fn record_only_on_change() {
        let mut p = Trajectory::starting_at(PathPoint::new(0.0, 0, 0));
        p.record(0.5, 0, 0);
        p.record(0.7, 1, 0);
        p.record(0.9, 1, 0);
        assert_eq!(p.points().len(), 2);
        assert_eq!(p.end(), 0.9);
        assert_eq!(p.at(0.8).max_fitness, 1);
        assert_eq!(p.at(0.6).max_fitness, 0);
    }
}
