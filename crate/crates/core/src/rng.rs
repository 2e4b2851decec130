//! Splittable, seedable random number generation.
//!
//! Every sampler in this crate takes a [`SeededRng`] by mutable reference.
//! Parallel ensembles never share a generator: replication `k` of a run with
//! seed `s` draws from `SeededRng::new(s).split(k)`, so the output of a run
//! does not depend on how replications are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct SeededRng {
    key: u64,
    inner: ChaCha12Rng,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::from_key(splitmix64(seed))
    }

    fn from_key(key: u64) -> Self {
        let mut seed = [0u8; 32];
        let mut state = key;
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self {
            key,
            inner: ChaCha12Rng::from_seed(seed),
        }
    }

    /// Independent child stream identified by `index`. Depends only on the
    /// seed this generator was created from, not on how much of it has been consumed.
    pub fn split(&self, index: u64) -> Self {
        Self::from_key(splitmix64(self.key ^ splitmix64(index.wrapping_add(0xA5A5_A5A5))))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
