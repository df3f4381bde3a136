use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::engine::ModelParams;
use crate::error::{Error, Result};

/// Mutation and selection parameters shared by every N of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub mu: f64,
    pub q: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Population sizes, strictly increasing.
    pub n_ladder: Vec<u64>,
    pub params: SweepParams,
    /// Defaults to max(10·𝒯(N_min), 10).
    #[serde(default)]
    pub horizon: Option<f64>,
    pub replicates: u64,
    pub seed: u64,
    /// Number of equally spaced observation times in (0, t] per replicate.
    #[serde(default)]
    pub sample_points: usize,
    /// K for the Λ_K membership column.
    #[serde(default)]
    pub lambda_k: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Replaces the barrier slope M of ℰ for every N.
    #[serde(default)]
    pub barrier_m: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Off by default so that repeated runs give identical bytes.
    #[serde(default)]
    pub record_wallclock: bool,
    #[serde(default)]
    pub max_events: Option<u64>,
}

fn config_error(pointer: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.to_string(),
        reason: reason.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

impl SweepConfig {
    /// Parses and validates; errors carry a JSON pointer to the field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            config_error(&pointer, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ladder.is_empty() {
            return Err(config_error("/n_ladder", "must not be empty"));
        }
        if let Some(i) = self.n_ladder.iter().position(|&n| n < 2) {
            return Err(config_error(&format!("/n_ladder/{i}"), "population size must be at least 2"));
        }
        if let Some(i) = self.n_ladder.windows(2).position(|w| w[1] <= w[0]) {
            return Err(config_error(&format!("/n_ladder/{}", i + 1), "must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(config_error("/replicates", "must be at least 1"));
        }
        let p = self.params;
        if !(p.mu > 0.0 && p.mu.is_finite()) {
            return Err(config_error("/params/mu", "must be positive and finite"));
        }
        if !(p.q > 0.0 && p.q <= 1.0) {
            return Err(config_error("/params/q", "must lie in (0, 1]"));
        }
        if !(p.gamma >= 0.0 && p.gamma.is_finite()) {
            return Err(config_error("/params/gamma", "must be nonnegative and finite"));
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_error("/horizon", "must be positive and finite"));
            }
        }
        if self.workers == Some(0) {
            return Err(config_error("/workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self, n: u64) -> Result<ModelParams> {
        ModelParams::new(n, self.params.mu, self.params.q, self.params.gamma)
    }

    /// The configured horizon, or max(10·𝒯(N_min), 10) where 𝒯 is defined.
    pub fn resolved_horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(|| {
            let log_n = (self.n_ladder[0] as f64).ln();
            let l = log_n.ln();
            if self.params.gamma > 0.0 && l > 0.0 {
                (10.0 * 16.0 * l * l / (self.params.gamma * log_n)).max(10.0)
            } else {
                10.0
            }
        })
    }

    /// Equally spaced observation times in (0, t].
    pub fn sample_times(&self) -> Vec<f64> {
        let t = self.resolved_horizon();
        let k = self.sample_points;
        (1..=k).map(|i| t * i as f64 / k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"n_ladder":[10,20],"params":{"mu":1,"q":1,"gamma":1},"replicates":2,"seed":5}"#;

    #[test]
    fn minimal_parses() {
        let c = SweepConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.n_ladder, [10, 20]);
        assert!(c.horizon.is_none());
        assert!(!c.record_wallclock);
    }

    #[test]
    fn default_horizon() {
        let c = SweepConfig::from_json(MINIMAL).unwrap();
        let log_n = 10f64.ln();
        let big_t = 16.0 * log_n.ln().powi(2) / log_n;
        assert!((c.resolved_horizon() - 10.0 * big_t).abs() < 1e-12 * big_t);
        assert!(10.0 * big_t > 10.0);
        let mut c = c;
        c.params.gamma = 1000.0;
        assert_eq!(c.resolved_horizon(), 10.0);
    }

    fn err_pointer(text: &str) -> String {
        match SweepConfig::from_json(text) {
            Err(Error::Config { pointer, .. }) => pointer,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn pointers() {
        assert_eq!(err_pointer(&MINIMAL.replace("[10,20]", "[20,10]")), "/n_ladder/1");
        assert_eq!(err_pointer(&MINIMAL.replace("\"mu\":1", "\"mu\":\"x\"")), "/params/mu");
        assert_eq!(err_pointer(&MINIMAL.replace("\"mu\":1", "\"mu\":-1")), "/params/mu");
        assert_eq!(err_pointer(&MINIMAL.replace("\"replicates\":2", "\"replicates\":0")), "/replicates");
        assert_eq!(err_pointer(&MINIMAL.replace("[10,20]", "[10,\"a\"]")), "/n_ladder/1");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replace("\"seed\":5", "\"seed\":5,\"bogus\":1");
        assert!(SweepConfig::from_json(&text).is_err());
    }

    #[test]
    fn sample_times_span_horizon() {
        let mut c = SweepConfig::from_json(MINIMAL).unwrap();
        c.horizon = Some(2.0);
        c.sample_points = 4;
        assert_eq!(c.sample_times(), [0.5, 1.0, 1.5, 2.0]);
    }
}
