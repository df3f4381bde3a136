use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use super::ReplicateResult;

pub const RESULTS_HEADER: [&str; 13] = [
    "N",
    "replicate",
    "seed_stream",
    "t",
    "M",
    "mean_fitness_final",
    "c2_final",
    "max_fitness_final",
    "rate_max",
    "event_E",
    "lambda_K_member",
    "wallclock_s",
    "status",
];

/// 17 significant digits, enough to round-trip any f64; `NA` if not finite.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NA".to_string()
    }
}

fn fmt_flag(x: Option<bool>) -> &'static str {
    match x {
        Some(true) => "1",
        Some(false) => "0",
        None => "NA",
    }
}

fn status(r: &ReplicateResult) -> String {
    match &r.error {
        None => "ok".into(),
        Some(e) => format!("error: {}", e.replace([',', '\n', '\r'], ";")),
    }
}

pub fn write_results_csv<W: Write>(results: &[ReplicateResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", RESULTS_HEADER.join(","))?;
    for r in results {
        let fields = [
            r.n.to_string(),
            r.replicate.to_string(),
            r.seed_stream.to_string(),
            fmt_float(r.horizon),
            r.m_steps.map_or("NA".into(), |m| m.to_string()),
            fmt_float(r.mean_fitness_final),
            fmt_float(r.c2_final),
            if r.is_ok() { r.max_fitness_final.to_string() } else { "NA".into() },
            fmt_float(r.rate_max),
            fmt_flag(r.event_e).into(),
            fmt_flag(r.lambda_k_member).into(),
            r.wallclock_s.map_or("NA".into(), fmt_float),
            status(r),
        ];
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// What a run needs to be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            parameters,
            seed,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(f64::NAN), "NA");
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_columns() {
        let r = ReplicateResult {
            n: 10,
            replicate: 2,
            seed_stream: 99,
            horizon: 1.0,
            m_steps: None,
            mean_fitness_final: 0.5,
            c2_final: 0.25,
            max_fitness_final: 3,
            rate_max: 3.0,
            event_e: Some(true),
            lambda_k_member: None,
            wallclock_s: None,
            error: None,
        };
        let mut buf = Vec::new();
        write_results_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), 13);
        let row: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(row.len(), 13);
        assert_eq!(&row[..5], ["10", "2", "99", "1.0000000000000000e0", "NA"]);
        assert_eq!(&row[9..], ["1", "NA", "NA", "ok"]);
    }
}
