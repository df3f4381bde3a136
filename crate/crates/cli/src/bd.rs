use std::path::PathBuf;

use moran_core::branching::compare_pmf;
use moran_core::experiments::{fmt_float, Manifest};
use moran_core::BranchingParams;
use serde::Serialize;

use crate::output::{nonnegative, positive, CliResult, OutDir};

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Args {
    /// Birth rate w.
    #[arg(long, value_parser = positive)]
    pub w: f64,
    /// Death rate d.
    #[arg(long, value_parser = positive)]
    pub d: f64,
    /// Type-advance rate qμ.
    #[arg(long, value_parser = nonnegative)]
    pub qmu: f64,
    /// Time s at which Z_s is compared.
    #[arg(long, value_parser = nonnegative)]
    pub s: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub paths: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub max_count: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    paths: u64,
    empirical_tail: f64,
    analytic_tail: f64,
    chi2: f64,
    dof: u64,
    p_value: f64,
}

pub fn run(a: &Args) -> CliResult {
    let bp = BranchingParams::new(a.w, a.d, a.qmu)?;
    let cmp = compare_pmf(&bp, a.s, a.paths, a.seed, a.max_count)?;
    let mut out = OutDir::create(&a.out)?;
    out.write_with("bd_compare.csv", |w| {
        writeln!(w, "count,analytic,empirical,std_error,mean_advanced")?;
        for r in &cmp.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.count,
                fmt_float(r.analytic),
                fmt_float(r.empirical),
                fmt_float(r.std_error),
                fmt_float(r.mean_advanced)
            )?;
        }
        Ok(())
    })?;
    out.write_json(
        "bd_summary.json",
        &Summary {
            paths: cmp.paths,
            empirical_tail: cmp.empirical_tail,
            analytic_tail: cmp.analytic_tail,
            chi2: cmp.chi2,
            dof: cmp.dof,
            p_value: cmp.p_value,
        },
    )?;
    let params = serde_json::to_value(a).expect("args serialize");
    out.finish(Manifest::new("bd-compare", params, Some(a.seed)))
}
