use serde::Serialize;

use super::{RateParams, ScalingConstants};
use crate::error::Result;

/// Branching quantities at the block scales for one population size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Report {
    #[serde(rename = "N_log10")]
    pub n_log10: f64,
    pub w: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    /// w·P(Z_𝒯 = 0), which tends to d.
    #[serde(rename = "wf_T")]
    pub wf_t: f64,
    pub d: f64,
    /// (log N)·P(Z_𝒯 = 1), which tends to 1.
    #[serde(rename = "logN_P1")]
    pub logn_p1: f64,
    /// P(Z_𝒯 > 𝒲), which tends to 1.
    pub survival: f64,
    #[serde(skip)]
    pub log_n: f64,
    #[serde(skip)]
    pub loglog_n: f64,
    #[serde(skip)]
    pub big_w: f64,
    /// w𝒯, equal to log log N.
    #[serde(skip)]
    pub w_t: f64,
    /// e^{w𝒯}, equal to log N.
    #[serde(skip)]
    pub exp_w_t: f64,
}

impl Prop2Report {
    pub fn abs_wf_minus_d(&self) -> f64 {
        (self.wf_t - self.d).abs()
    }

    /// Relative error of w𝒯 against log log N.
    pub fn w_t_rel_err(&self) -> f64 {
        (self.w_t - self.loglog_n).abs() / self.loglog_n.abs()
    }

    /// Relative error of e^{w𝒯} against log N.
    pub fn exp_w_t_rel_err(&self) -> f64 {
        (self.exp_w_t - self.log_n).abs() / self.log_n
    }
}

/// Evaluates the branching law of 𝒵 at time 𝒯 for population size e^{log_n}.
pub fn prop2_report(log_n: f64, rates: RateParams) -> Result<Prop2Report> {
    let c = ScalingConstants::from_log_n(log_n, rates, 1.0)?;
    report_for(&c)
}

pub fn report_for(c: &ScalingConstants) -> Result<Prop2Report> {
    let law = c.branching().at(c.big_t)?;
    let w = c.birth_rate_w;
    let w_t = w * c.big_t;
    Ok(Prop2Report {
        n_log10: c.log10_n(),
        w,
        big_t: c.big_t,
        wf_t: w * law.extinction(),
        d: c.death_rate_d,
        logn_p1: c.log_n * law.survival() * law.one_minus_tail(),
        survival: law.survival_above(c.big_w),
        log_n: c.log_n,
        loglog_n: c.loglog_n,
        big_w: c.big_w,
        w_t,
        exp_w_t: w_t.exp(),
    })
}
