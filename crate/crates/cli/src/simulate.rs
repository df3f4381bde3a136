use std::path::PathBuf;

use moran_core::engine::{simulate_with, SimulateOptions};
use moran_core::experiments::{fmt_float, Manifest};
use moran_core::rng::seeded;
use moran_core::ModelParams;
use serde::Serialize;

use crate::output::{fraction, nonnegative, positive, CliResult, OutDir};

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Args {
    /// Population size N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Mutation rate μ.
    #[arg(long, value_parser = positive)]
    pub mu: f64,
    /// Beneficial fraction q.
    #[arg(long, value_parser = fraction)]
    pub q: f64,
    /// Selection strength γ.
    #[arg(long, value_parser = nonnegative)]
    pub gamma: f64,
    #[arg(long, value_parser = positive)]
    pub horizon: f64,
    #[arg(long)]
    pub seed: u64,
    /// Number of equally spaced sample times on [0, horizon].
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write the full histogram at each sample time.
    #[arg(long)]
    pub snapshot: bool,
    #[arg(long)]
    pub max_events: Option<u64>,
}

pub fn run(a: &Args) -> CliResult {
    let params = ModelParams::new(a.n, a.mu, a.q, a.gamma)?;
    let k = a.samples - 1;
    let times: Vec<f64> = (0..=k).map(|i| a.horizon * i as f64 / k as f64).collect();
    let opts = SimulateOptions {
        keep_snapshots: a.snapshot,
        max_events: a.max_events,
    };
    let samples = simulate_with(&params, a.horizon, &times, &mut seeded(a.seed), opts)?;
    let mut out = OutDir::create(&a.out)?;
    out.write_with("trajectory.csv", |w| {
        writeln!(w, "t,mean,c2,max,median")?;
        for s in &samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_float(s.time),
                fmt_float(s.mean_fitness),
                fmt_float(s.centered_variance),
                s.max_fitness,
                s.median_level
            )?;
        }
        Ok(())
    })?;
    if a.snapshot {
        out.write_with("snapshots.jsonl", |w| {
            for s in &samples {
                if let Some(h) = &s.histogram_snapshot {
                    serde_json::to_writer(&mut *w, &h.snapshot(s.time))?;
                    writeln!(w)?;
                }
            }
            Ok(())
        })?;
    }
    let params_json = serde_json::to_value(a).expect("args serialize");
    out.finish(Manifest::new("simulate", params_json, Some(a.seed)))
}
