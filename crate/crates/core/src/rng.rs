//! Reproducible uniform streams.
//!
//! Every auxiliary variable in the library is drawn from a [`UniformStream`],
//! a counter-based ChaCha8 generator addressed by `(seed, stream_id)`. Two
//! streams with the same address produce the same sequence no matter which
//! thread drives them or in which order, which is what makes the parallel
//! simulation studies bit-reproducible.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct UniformStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        UniformStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// A child stream sharing the seed, addressed by `parts` mixed into this
    /// stream's id.
    pub fn substream(&self, parts: &[u64]) -> UniformStream {
        let mut all = Vec::with_capacity(parts.len() + 1);
        all.push(self.stream_id);
        all.extend_from_slice(parts);
        UniformStream::new(self.seed, stream_id(&all))
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }
}

impl RngCore for UniformStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit stream id derived from a list of coordinates.
///
/// Used to give every (cell, replication) pair of a simulation study its own
/// stream, independent of scheduling order.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C909u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stream id for a real-valued coordinate (hashes the bit pattern).
pub fn f64_key(x: f64) -> u64 {
    x.to_bits()
}
