//! Counter-based random streams.
//!
//! A [`StreamKey`] names a family of independent generators: the base seed, a
//! named domain (`"mi"`, `"acc"`, `"sme"`, `"ml"`, ...), and a child index. Each
//! trajectory then draws from the ChaCha stream selected by its own index, so
//! the numbers a trajectory sees never depend on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrajectoryRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; only used to turn domain names into 64-bit tags.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325_u64, |h, b| (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    tag: u64,
}

impl StreamKey {
    pub fn new(seed: u64, domain: &str) -> Self {
        let mut s = seed ^ fnv1a(domain.as_bytes());
        Self { seed, tag: splitmix64(&mut s) }
    }

    /// Independent sub-family, e.g. one per curve in a sweep.
    pub fn child(&self, index: u64) -> Self {
        let mut s = self.tag ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        Self { seed: self.seed, tag: splitmix64(&mut s) }
    }

    /// Base seed this key was derived from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for trajectory `index`.
    pub fn rng(&self, index: u64) -> TrajectoryRng {
        let mut s = self.tag;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}
