use serde::ser::{Serialize, SerializeMap, Serializer};
use statrs::function::gamma::ln_gamma;

use super::prop1_product;
use crate::branching::{report_for, ScalingConstants};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub name: &'static str,
    pub formula: &'static str,
    /// NaN when the quantity is undefined at these inputs; flags are 0 or 1.
    pub value: f64,
}

impl Serialize for Diagnostic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("formula", self.formula)?;
        map.serialize_entry("value", &self.value.is_finite().then_some(self.value))?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AsymptoticInputs {
    pub log10_n: f64,
    pub gamma: f64,
    pub mu: f64,
    pub q: f64,
    pub horizon: f64,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

/// Named diagnostics at one population size. Serializes as a JSON object
/// keyed by diagnostic name, plus an `inputs` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub inputs: AsymptoticInputs,
    pub diagnostics: Vec<Diagnostic>,
}

impl AsymptoticReport {
    fn new(c: &ScalingConstants) -> Self {
        Self {
            inputs: AsymptoticInputs {
                log10_n: c.log10_n(),
                gamma: c.rates.selection_strength,
                mu: c.rates.mutation_rate,
                q: c.rates.beneficial_fraction,
                horizon: c.horizon,
                cap: None,
                k: None,
            },
            diagnostics: Vec::new(),
        }
    }

    fn push(&mut self, name: &'static str, formula: &'static str, value: f64) {
        self.diagnostics.push(Diagnostic { name, formula, value });
    }

    fn flag(&mut self, name: &'static str, formula: &'static str, holds: bool) {
        self.push(name, formula, if holds { 1.0 } else { 0.0 });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.name == name).map(|d| d.value)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.diagnostics.iter().map(|d| d.name)
    }

    fn extend(&mut self, other: AsymptoticReport) {
        self.diagnostics.extend(other.diagnostics);
    }
}

impl Serialize for AsymptoticReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.diagnostics.len() + 1))?;
        map.serialize_entry("inputs", &self.inputs)?;
        for d in &self.diagnostics {
            map.serialize_entry(d.name, d)?;
        }
        map.end()
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// The beneficial-burst bound and its successive relaxations, all in log
/// space, with m = ⌈2𝒲⌉ and x = qμ𝒯.
pub fn lemma4_diagnostics(c: &ScalingConstants) -> AsymptoticReport {
    let mut r = AsymptoticReport::new(c);
    let (log_n, l, big_w, big_t) = (c.log_n, c.loglog_n, c.big_w, c.big_t);
    let gamma = c.rates.selection_strength;
    let qmu = c.rates.beneficial_rate();
    let m = (2.0 * big_w).ceil();
    let x = qmu * big_t;
    let ln4 = 4f64.ln();

    let poisson = log_n + m * x.ln() - x - ln4 - ln_gamma(m + 1.0);
    let stirling = log_n + m * (2.0 * qmu * l).ln()
        - x
        - m
        - ln4
        - m * (gamma * big_w).ln()
        - 0.5 * (2.0 * std::f64::consts::PI * m).ln()
        - m * m.ln();
    let head = log_n + m * (2.0 * qmu * l).ln() - x - m - ln4;
    let relaxed = head
        - 2.0 * big_w * (2.0 * gamma).ln()
        - 0.5 * (4.0 * std::f64::consts::PI * big_w).ln()
        - 4.0 * big_w * big_w.ln();
    let exponent = 0.5 - (8.0 * l).ln() / (2.0 * l);
    let power_form = head - log_n + log_n * (1.0 - exponent)
        - 2.0 * big_w * (2.0 * gamma).ln()
        - 0.5 * (4.0 * std::f64::consts::PI * big_w).ln();

    r.push("lemma4_m", "m = ceil(2W)", m);
    r.push("lemma4_log_poisson_bound", "log[N x^m e^-x / (4 m!)], x = q mu T", poisson);
    r.push(
        "lemma4_log_stirling_form",
        "log[N (2 q mu L)^m e^(-x-m) / (4 (gamma W)^m sqrt(2 pi m) m^m)]",
        stirling,
    );
    r.push(
        "lemma4_log_relaxed",
        "log[N (2 q mu L)^m e^(-x-m) / (4 (2 gamma)^(2W) sqrt(4 pi W) W^(4W))]",
        relaxed,
    );
    r.flag("lemma4_relaxed_below_stirling", "relaxed <= stirling form", relaxed <= stirling);
    r.push(
        "lemma4_log_power_form",
        "log[N^(1/2 + log(8L)/(2L)) (2 q mu L)^m e^(-x-m) / (4 (2 gamma)^(2W) sqrt(4 pi W))]",
        power_form,
    );
    let wt = big_w * big_t;
    r.push("identity_WT", "W T", wt);
    r.push("identity_WT_rel_err", "|W T - 2L/gamma| / (2L/gamma)", rel_err(wt, 2.0 * l / gamma));
    let w4w = 4.0 * big_w * big_w.ln();
    r.push("identity_W4W_log", "4W log W", w4w);
    r.push(
        "identity_W4W_rel_err",
        "|4W log W - log N (1/2 - log(8L)/(2L))| / (log N (1/2 - log(8L)/(2L)))",
        rel_err(w4w, log_n * exponent),
    );
    r
}

/// (𝒲/2)(1 − e^{−qμ𝒯}) with its quadratic lower bound and asymptote.
pub fn lemma5_diagnostics(c: &ScalingConstants) -> AsymptoticReport {
    let mut r = AsymptoticReport::new(c);
    let big_w = c.big_w;
    let x = c.rates.beneficial_rate() * c.big_t;
    let value = big_w / 2.0 * -(-x).exp_m1();
    let bound = big_w / 2.0 * (x - x * x / 2.0);
    let printed = (2.0 * big_w * x - big_w * x * x) / 2.0;
    r.push("lemma5_value", "(W/2)(1 - e^(-q mu T))", value);
    r.push("lemma5_quadratic_bound", "(W/2)(x - x^2/2), x = q mu T", bound);
    r.flag("lemma5_bound_holds", "(W/2)(x - x^2/2) < value", bound < value);
    r.push("lemma5_quadratic_doubled", "(2 W x - W x^2)/2", printed);
    r.flag("lemma5_doubled_holds", "(2 W x - W x^2)/2 < value", printed < value);
    r.push(
        "lemma5_asymptote",
        "q mu W T / 2 = q mu L / gamma",
        c.rates.beneficial_rate() * c.loglog_n / c.rates.selection_strength,
    );
    r
}

/// Every diagnostic for one ladder point: branching limits at 𝒯, both
/// Poisson-tail and drift divergence checks, and the Λ_K product bound at (K, k).
pub fn asymptotic_row(c: &ScalingConstants, cap: u64, k: u64) -> Result<AsymptoticReport> {
    let p = report_for(c)?;
    let mut r = AsymptoticReport::new(c);
    r.inputs.cap = Some(cap);
    r.inputs.k = Some(k);
    r.push("w", "gamma W / 2", p.w);
    r.push("d", "(1+q) mu + 1", p.d);
    r.push("T", "16 L^2 / (gamma log N)", p.big_t);
    r.push("W", "log N / (8L)", p.big_w);
    r.push("M", "ceil(t / 2T) - 1", c.m_steps as f64);
    r.push("wf_T", "w P(Z_T = 0)", p.wf_t);
    r.push("abs_wf_T_minus_d", "|w f(T) - d|", p.abs_wf_minus_d());
    r.push("logN_P1", "log N (1 - f(T))(1 - g(T))", p.logn_p1);
    r.push("survival", "P(Z_T > W)", p.survival);
    r.push("identity_wT", "w T", p.w_t);
    r.push("identity_wT_rel_err", "|w T - L| / L", p.w_t_rel_err());
    r.push("identity_exp_wT_rel_err", "|e^(w T) - log N| / log N", p.exp_w_t_rel_err());
    r.extend(lemma4_diagnostics(c));
    r.extend(lemma5_diagnostics(c));
    let bound = if k <= cap {
        prop1_product(c.horizon, c.big_t, k).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    r.push("prop1_bound", "prod_{i=1..k} (t + 1 - 2 i T) / (t + 1)", bound);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::RateParams;

    fn at(log10_n: f64, mu: f64) -> ScalingConstants {
        ScalingConstants::from_log10_n(log10_n, RateParams::new(mu, 1.0, 1.0).unwrap(), 10.0).unwrap()
    }

    fn ladder(ks: std::ops::RangeInclusive<i32>, mu: f64) -> Vec<ScalingConstants> {
        ks.map(|k| at(2f64.powi(k), mu)).collect()
    }

    fn increasing(v: &[f64]) -> bool {
        v.windows(2).all(|w| w[1] > w[0])
    }

    #[test]
    fn identities_hold() {
        let c = at(10.0, 1.0);
        assert!(lemma4_diagnostics(&c).get("identity_WT_rel_err").unwrap() < 1e-12);
        let c = at(20.0, 1.0);
        assert!(lemma4_diagnostics(&c).get("identity_W4W_rel_err").unwrap() < 1e-12);
        for c in ladder(3..=10, 0.1) {
            let r = asymptotic_row(&c, 3, 1).unwrap();
            for name in ["identity_WT_rel_err", "identity_W4W_rel_err", "identity_wT_rel_err", "identity_exp_wT_rel_err"] {
                assert!(r.get(name).unwrap() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn lemma5_googol_value() {
        // 50-digit evaluation of (𝒲/2)(1 − e^{−𝒯}) at N = 10¹⁰⁰, γ = q = μ = 1.
        let r = lemma5_diagnostics(&at(100.0, 1.0));
        assert!((r.get("lemma5_value").unwrap() - 2.307_171_587_348_696).abs() < 1e-12);
        let asym = r.get("lemma5_asymptote").unwrap();
        assert!((asym - 5.439_2).abs() < 1e-3);
    }

    #[test]
    fn lemma5_bound_below_value() {
        for c in ladder(3..=12, 1.0).iter().chain(&ladder(3..=12, 0.1)) {
            let r = lemma5_diagnostics(c);
            assert_eq!(r.get("lemma5_bound_holds"), Some(1.0));
            assert!(r.get("lemma5_quadratic_bound").unwrap() < r.get("lemma5_value").unwrap());
        }
    }

    #[test]
    fn doubled_quadratic_overshoots() {
        // Small qμ𝒯, where (2𝒲x − 𝒲x²)/2 ≈ 𝒲x exceeds (𝒲/2)(1 − e^{−x}) ≈ 𝒲x/2.
        let r = lemma5_diagnostics(&at(10_000.0, 1.0));
        assert_eq!(r.get("lemma5_doubled_holds"), Some(0.0));
    }

    #[test]
    fn divergence_ladders() {
        let poisson: Vec<f64> = ladder(5..=12, 1.0)
            .iter()
            .map(|c| lemma4_diagnostics(c).get("lemma4_log_poisson_bound").unwrap())
            .collect();
        assert!(increasing(&poisson), "{poisson:?}");
        let lemma5: Vec<f64> = ladder(5..=12, 1.0)
            .iter()
            .map(|c| lemma5_diagnostics(c).get("lemma5_value").unwrap())
            .collect();
        assert!(increasing(&lemma5), "{lemma5:?}");
    }

    #[test]
    fn json_is_keyed_by_name() {
        let r = asymptotic_row(&at(10.0, 0.1), 4, 2).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), r.diagnostics.len() + 1);
        assert_eq!(obj["inputs"]["K"], 4);
        assert!(obj["lemma5_value"]["formula"].is_string());
        assert!(obj["lemma5_value"]["value"].is_number());
    }

    #[test]
    fn vacuous_prop1_is_null() {
        let c = ScalingConstants::from_log10_n(3.0, RateParams::new(0.1, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let r = asymptotic_row(&c, 5, 5).unwrap();
        assert!(r.get("prop1_bound").unwrap().is_nan());
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["prop1_bound"]["value"].is_null());
    }
}
