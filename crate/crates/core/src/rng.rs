//! Keyed random streams.
//!
//! An [`RngStream`] is a `(seed, stream_id)` pair. It is a plain value: the
//! generator it opens always starts from the same state, and child streams
//! are derived by mixing an index into the stream id, so Monte Carlo work can
//! be split across threads without changing a single draw.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type opened by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Root stream for a seed.
    pub const fn from_seed(seed: u64) -> Self {
        RngStream { seed, stream_id: 0 }
    }

    /// Child stream `index` of this stream. Children of distinct parents or
    /// with distinct indices land on distinct ChaCha stream ids.
    pub fn substream(&self, index: u64) -> Self {
        let mixed = mix64(self.stream_id ^ mix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        RngStream { seed: self.seed, stream_id: mixed }
    }

    /// Opens a fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
