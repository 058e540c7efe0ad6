//! Reproducible random streams.
//!
//! A [`RandomStream`] is a `(seed, stream_id)` pair. Each stream hands out
//! independent *lanes* (one per consumer: lifetime chain, censoring chain,
//! limit-process draws, ...) so that adding a consumer never shifts the
//! numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha12Rng;

/// Lane used for the lifetime chain.
pub const LANE_LIFETIME: u64 = 0;
/// Lane used for the censoring chain.
pub const LANE_CENSORING: u64 = 1;
/// Lane used for limit-process draws.
pub const LANE_LIMIT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator for one lane of this stream.
    pub fn rng(&self, lane: u64) -> StreamRng {
        let key = splitmix64(self.seed ^ splitmix64(lane.wrapping_add(0x5851_F42D_4C95_7F2D)));
        let mut rng = ChaCha12Rng::seed_from_u64(key);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A stream keyed by an extra label (e.g. sample size), same stream id.
    pub fn derive(&self, label: u64) -> Self {
        Self { seed: splitmix64(self.seed.wrapping_add(splitmix64(label))), stream_id: self.stream_id }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
