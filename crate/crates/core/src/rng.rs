//! Seeded random streams.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by the master seed
//! and a stream identifier, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for a single standalone run.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream identifier for replicate `replicate` at population size `n`.
pub fn stream_id(n: u64, replicate: u64) -> u64 {
    mix64(mix64(n) ^ replicate.rotate_left(17))
}

/// Generator for replicate `replicate` of population size `n` under `seed`.
pub fn replicate_rng(seed: u64, n: u64, replicate: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream_id(n, replicate));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |n, r| -> Vec<u64> {
            let mut rng = replicate_rng(7, n, r);
            (0..8).map(|_| rng.random()).collect()
        };
        let (a, b, c) = (draw(1000, 3), draw(1000, 3), draw(1000, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn chacha_output_is_pinned() {
        // Regression pin: a change here breaks reproduction of earlier runs.
        let first: u64 = seeded(42).random();
        let stream: u64 = replicate_rng(42, 100, 0).random();
        assert_eq!((first, stream), (12_578_764_544_318_200_737, 9_977_426_178_069_696_406));
        assert_ne!(stream_id(100, 0), stream_id(1000, 0));
    }
}
