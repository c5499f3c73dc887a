//! Seeded random streams.
//!
//! Every sampling routine draws from a `ChaCha8Rng` addressed by a 64-bit
//! seed and a stream id. Streams of the same seed are statistically
//! independent, so a consumer that changes how many numbers it draws from
//! one stream never shifts the numbers another stream produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used by the ladder builder and the synthesizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Spacings = 0,
    ElasticWidths = 1,
    InelasticWidths = 2,
    AmplitudeSigns = 3,
    Bivariates = 4,
    Auxiliary = 5,
}

/// A generator positioned at the start of `stream` for `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Derives a child seed; used to give chunks, components or trials their
/// own key while keeping the whole run a function of one seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
