use std::path::PathBuf;

use moran_core::branching::RateParams;
use moran_core::experiments::{fmt_float, Manifest};
use moran_core::observables::{asymptotic_row, AsymptoticReport};
use moran_core::ScalingConstants;
use serde::Serialize;

use crate::output::{fraction, positive, CliError, CliResult, OutDir};

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Args {
    /// Values of log10 N: a comma-separated list whose items are numbers or
    /// ranges `a..b` (step 1) and `a..b:step`, e.g. `3..300` or `8,16,32`.
    #[arg(long = "log10n-ladder", value_parser = parse_ladder)]
    pub ladder: Ladder,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, value_parser = fraction)]
    pub q: f64,
    /// Cap K on the total number of marks.
    #[arg(long = "K", default_value_t = 3)]
    pub cap: u64,
    /// Realized mark count k for the product bound.
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// Horizon t.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub t: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Ladder(pub Vec<f64>);

fn parse_item(item: &str, out: &mut Vec<f64>) -> Result<(), String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    if let Some((a, rest)) = item.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (num(b)?, num(s)?),
            None => (num(rest)?, 1.0),
        };
        let a = num(a)?;
        if !(step > 0.0) || b < a {
            return Err(format!("`{item}` is not an increasing range"));
        }
        let count = ((b - a) / step + 1e-9).floor() as u64;
        out.extend((0..=count).map(|i| a + i as f64 * step));
    } else {
        out.push(num(item)?);
    }
    Ok(())
}

pub fn parse_ladder(s: &str) -> Result<Ladder, String> {
    let mut v = Vec::new();
    for item in s.split(',').filter(|x| !x.trim().is_empty()) {
        parse_item(item, &mut v)?;
    }
    if v.is_empty() {
        return Err("the ladder is empty".into());
    }
    if let Some(x) = v.iter().find(|&&x| !(x > 1.0 && x.is_finite())) {
        return Err(format!("ladder value {x} is out of domain; log10 N must exceed 1"));
    }
    Ok(Ladder(v))
}

pub fn run(a: &Args) -> CliResult {
    let rates = RateParams::new(a.mu, a.q, a.gamma)?;
    let rows: Vec<AsymptoticReport> = a
        .ladder
        .0
        .iter()
        .map(|&x| {
            let c = ScalingConstants::from_log10_n(x, rates, a.t)?;
            asymptotic_row(&c, a.cap, a.k)
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;
    let mut out = OutDir::create(&a.out)?;
    out.write_with("asymptotics.csv", |w| {
        let names: Vec<&str> = rows[0].names().collect();
        writeln!(w, "log10_N,{}", names.join(","))?;
        for r in &rows {
            let values: Vec<String> = r.diagnostics.iter().map(|d| fmt_float(d.value)).collect();
            writeln!(w, "{},{}", fmt_float(r.inputs.log10_n), values.join(","))?;
        }
        Ok(())
    })?;
    out.write_json("asymptotics.json", &rows)?;
    let params = serde_json::to_value(a).expect("args serialize");
    out.finish(Manifest::new("asymptotics", params, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_syntax() {
        assert_eq!(parse_ladder("3..6").unwrap().0, [3.0, 4.0, 5.0, 6.0]);
        assert_eq!(parse_ladder("8,16, 32").unwrap().0, [8.0, 16.0, 32.0]);
        assert_eq!(parse_ladder("10..30:10,100").unwrap().0, [10.0, 20.0, 30.0, 100.0]);
        assert!(parse_ladder("1").is_err());
        assert!(parse_ladder("0.5..3").is_err());
        assert!(parse_ladder("x").is_err());
        assert!(parse_ladder("5..3").is_err());
    }
}
