use std::path::PathBuf;

use moran_core::experiments::{
    event_frequencies, fit_scaling, run_sweep, write_results_csv, Manifest, SweepConfig,
};
use moran_core::ScalingConstants;
use serde::Serialize;

use crate::output::{CliError, CliResult, OutDir};

#[derive(Debug, Clone, clap::Args)]
pub struct Args {
    /// JSON sweep configuration.
    pub config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved plan and exit without simulating.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Serialize)]
struct PlanRow {
    n: u64,
    big_t: Option<f64>,
    m_steps: Option<u64>,
    replicates: u64,
}

#[derive(Serialize)]
struct Plan<'a> {
    config: &'a SweepConfig,
    horizon: f64,
    tasks: u64,
    per_n: Vec<PlanRow>,
}

#[derive(Serialize)]
struct Timing {
    total_wallclock_s: f64,
}

pub fn run(a: &Args) -> CliResult {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = SweepConfig::from_json(&text)?;
    let horizon = cfg.resolved_horizon();
    if a.dry_run {
        let per_n = cfg
            .n_ladder
            .iter()
            .map(|&n| {
                let c = cfg.model(n).ok().and_then(|p| ScalingConstants::for_params(&p, horizon).ok());
                PlanRow {
                    n,
                    big_t: c.as_ref().map(|c| c.big_t),
                    m_steps: c.map(|c| cfg.barrier_m.unwrap_or(c.m_steps)),
                    replicates: cfg.replicates,
                }
            })
            .collect();
        let plan = Plan {
            config: &cfg,
            horizon,
            tasks: cfg.replicates * cfg.n_ladder.len() as u64,
            per_n,
        };
        println!("{}", serde_json::to_string_pretty(&plan).expect("plan serializes"));
        return Ok(());
    }
    let root = a
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let start = std::time::Instant::now();
    let results = run_sweep(&cfg)?;
    let mut out = OutDir::create(&root)?;
    out.write_with("results.csv", |w| write_results_csv(&results, w))?;
    match fit_scaling(&results) {
        Ok(fit) => out.write_json("fit_report.json", &fit)?,
        Err(e) => out.write_json("fit_report.json", &serde_json::json!({ "error": e.to_string() }))?,
    }
    let events = event_frequencies(&results);
    for w in &events.warnings {
        eprintln!("warning: {w}");
    }
    out.write_json("event_probability.json", &events)?;
    if cfg.record_wallclock {
        out.write_json(
            "timing.json",
            &Timing {
                total_wallclock_s: start.elapsed().as_secs_f64(),
            },
        )?;
    }
    let params = serde_json::to_value(&cfg).expect("config serializes");
    out.finish(Manifest::new("sweep", params, Some(cfg.seed)))
}
