//! Benchmark fixtures shared by the criterion targets.

use moran_core::rng::seeded;
use moran_core::{ModelParams, Simulator};

/// A population of size `n` run for `warmup` events from the all-zero state,
/// so that several fitness classes are occupied.
pub fn warmed(n: u64, gamma: f64, warmup: u64) -> Simulator {
    let params = ModelParams::new(n, 1.0, 0.5, gamma).expect("valid parameters");
    let mut sim = Simulator::new(params).expect("valid start");
    let mut rng = seeded(1);
    for _ in 0..warmup {
        sim.step(&mut rng).expect("positive rate");
    }
    sim
}
