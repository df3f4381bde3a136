//! Birth-death process with birth rate w, death rate d and a type-advance
//! rate qμ, started from one type-0 particle.
//!
//! All closed forms go through
//!
//! ```text
//! r(s) = (e^{(w−d)s} − 1) / (w − d)
//! ```
//!
//! which gives f = dr/(1+wr), g = wr/(1+wr) and
//! F(x,s) = (x + d(1−x)r) / (1 + w(1−x)r). The reciprocal 1/r is evaluated
//! with `expm1` on whichever side keeps the exponent nonpositive, so none of the
//! forms overflow. When |w−d|s < 1e-8 the critical limit r = s is used.

mod asymptotics;
mod montecarlo;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use asymptotics::{prop2_report, report_for, Prop2Report};
pub use montecarlo::{
    compare_pmf, simulate_bd, simulate_bd_with, BdPath, BdPoint, PmfComparison, PmfRow,
};
pub use scaling::{RateParams, ScalingConstants};

/// Below this |w−d|·s the critical-case limit replaces the closed form.
pub const CRITICAL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingParams {
    pub birth: f64,
    pub death: f64,
    pub type_advance: f64,
}

impl BranchingParams {
    pub fn new(birth: f64, death: f64, type_advance: f64) -> Result<Self> {
        if !(birth > 0.0 && birth.is_finite()) {
            return Err(invalid("birth", "must be positive and finite"));
        }
        if !(death > 0.0 && death.is_finite()) {
            return Err(invalid("death", "must be positive and finite"));
        }
        if !(type_advance >= 0.0 && type_advance.is_finite()) {
            return Err(invalid("type_advance", "must be nonnegative and finite"));
        }
        Ok(Self {
            birth,
            death,
            type_advance,
        })
    }

    /// Law of Z_s given Z_0 = 1.
    pub fn at(&self, s: f64) -> Result<BranchingDistribution> {
        if !(s >= 0.0) || s.is_infinite() {
            return Err(invalid("s", "time must be nonnegative and finite"));
        }
        let (w, d) = (self.birth, self.death);
        let inv_r = if s == 0.0 {
            f64::INFINITY
        } else {
            let x = (w - d) * s;
            if x.abs() < CRITICAL_THRESHOLD {
                1.0 / s
            } else if x > 0.0 {
                (w - d) * (-x).exp() / -(-x).exp_m1()
            } else {
                (w - d) / x.exp_m1()
            }
        };
        Ok(BranchingDistribution {
            birth: w,
            death: d,
            s,
            inv_r,
        })
    }
}

/// Closed-form law of the particle count Z_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingDistribution {
    birth: f64,
    death: f64,
    s: f64,
    /// 1/r(s); infinite at s = 0.
    inv_r: f64,
}

impl BranchingDistribution {
    pub fn time(&self) -> f64 {
        self.s
    }

    /// f(s) = P(Z_s = 0).
    pub fn extinction(&self) -> f64 {
        if self.inv_r.is_infinite() {
            return 0.0;
        }
        (self.death / (self.birth + self.inv_r)).min(1.0)
    }

    pub fn survival(&self) -> f64 {
        if self.inv_r.is_infinite() {
            return 1.0;
        }
        ((self.birth - self.death + self.inv_r) / (self.birth + self.inv_r)).max(0.0)
    }

    /// g(s), the ratio of the geometric tail.
    pub fn tail(&self) -> f64 {
        if self.inv_r.is_infinite() {
            return 0.0;
        }
        self.birth / (self.birth + self.inv_r)
    }

    /// 1 − g(s) = (w − d)/(w e^{(w−d)s} − d), computed without cancellation.
    pub fn one_minus_tail(&self) -> f64 {
        if self.inv_r.is_infinite() {
            return 1.0;
        }
        self.inv_r / (self.birth + self.inv_r)
    }

    /// P(Z_s = i).
    pub fn pmf(&self, i: u64) -> f64 {
        match i {
            0 => self.extinction(),
            _ => self.survival() * self.one_minus_tail() * self.tail().powf((i - 1) as f64),
        }
    }

    /// F(x, s) = E[x^{Z_s}].
    pub fn generating(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid("x", "generating function argument must lie in [0, 1]"));
        }
        if self.inv_r.is_infinite() {
            return Ok(x);
        }
        let (w, d) = (self.birth, self.death);
        Ok((x * self.inv_r + d * (1.0 - x)) / (self.inv_r + w * (1.0 - x)))
    }

    /// ln P(Z_s > threshold) = ln[(1 − f) g^threshold]; real thresholds allowed.
    pub fn log_survival_above(&self, threshold: f64) -> f64 {
        let base = self.survival().ln();
        if threshold == 0.0 {
            return base;
        }
        base + threshold * (-self.one_minus_tail()).ln_1p()
    }

    pub fn survival_above(&self, threshold: f64) -> f64 {
        self.log_survival_above(threshold).exp()
    }
}

fn checked_time(s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        Err(invalid("s", "time must be nonnegative"))
    } else {
        Ok(s)
    }
}

/// f(s) = d(e^{(w−d)s} − 1)/(w e^{(w−d)s} − d).
pub fn extinction_prob(bp: &BranchingParams, s: f64) -> Result<f64> {
    Ok(bp.at(checked_time(s)?)?.extinction())
}

/// g(s) = w(e^{(w−d)s} − 1)/(w e^{(w−d)s} − d).
pub fn tail_param(bp: &BranchingParams, s: f64) -> Result<f64> {
    Ok(bp.at(checked_time(s)?)?.tail())
}

pub fn count_pmf(bp: &BranchingParams, s: f64, i: u64) -> Result<f64> {
    Ok(bp.at(checked_time(s)?)?.pmf(i))
}

pub fn generating_function(bp: &BranchingParams, x: f64, s: f64) -> Result<f64> {
    bp.at(checked_time(s)?)?.generating(x)
}

pub fn survival_above(bp: &BranchingParams, s: f64, threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(invalid("threshold", "must be nonnegative"));
    }
    Ok(bp.at(checked_time(s)?)?.survival_above(threshold))
}
