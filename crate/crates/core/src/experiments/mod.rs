//! Ensemble orchestration: replicate fan-out over a bounded worker pool,
//! neutral drift estimation, the scaling fit across N, frequencies of ℰ,
//! and CSV/JSON persistence.

mod config;
mod fit;
mod output;
mod sweep;

pub use config::{SweepConfig, SweepParams};
pub use fit::{fit_scaling, scaling_predictor, FitReport, RateRow, MIN_LADDER, MIN_REPLICATES};
pub use output::{fmt_float, write_results_csv, Manifest, RESULTS_HEADER};
pub use sweep::{
    canonical_sort, drift_check, estimate_event_probability, event_frequencies, run_replicate, run_sweep,
    EventEstimate, EventFrequency, ReplicateResult,
};
