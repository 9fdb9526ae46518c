//! Counter-based random streams.
//!
//! Two kinds of randomness are used throughout the crate:
//!
//! * per-site draws for trap landscapes, which must depend only on
//!   `(seed, site)` so that windows can grow without disturbing sites
//!   that were already sampled;
//! * per-replicate streams for Monte Carlo, keyed by `(seed, tag, index)`
//!   so that results do not depend on scheduling or thread count.
//!
//! Both are portable: no platform-dependent float routines are involved in
//! producing the uniform variates.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map 64 random bits onto (0, 1] with 53-bit resolution.
#[inline]
pub fn bits_to_unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * INV_2_53
}

/// Uniform variate on (0, 1] determined by `(seed, site)` alone.
#[inline]
pub fn site_uniform(seed: u64, site: i64) -> f64 {
    let key = mix64(seed ^ GOLDEN).wrapping_add((site as u64).wrapping_mul(GOLDEN));
    bits_to_unit_open_closed(mix64(mix64(key)))
}

/// Derive a child seed, e.g. the environment seed of an annealed replicate.
#[inline]
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ tag.wrapping_mul(GOLDEN)).wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Stream tags keep the randomness of unrelated experiments apart even when
/// they share a user seed.
pub mod tags {
    pub const WALK_DIRECT: u64 = 0x11;
    pub const WALK_TIMECHANGE: u64 = 0x12;
    pub const SCENERY: u64 = 0x13;
    pub const EXIT_TIME: u64 = 0x14;
    pub const SUMS: u64 = 0x21;
    pub const BOOTSTRAP: u64 = 0x22;
    pub const ANNEALED_ENV: u64 = 0x31;
    pub const ENV_ENSEMBLE: u64 = 0x32;
}

/// Replicate stream: a ChaCha8 generator keyed by `(seed, tag)` with the
/// replicate index selecting the ChaCha stream.
#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, tag: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&tag.to_le_bytes());
        key[16..24].copy_from_slice(&mix64(seed ^ tag).to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(index);
        StreamRng { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on (0, 1].
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        bits_to_unit_open_closed(self.inner.next_u64())
    }

    /// Standard exponential by inversion.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Fair coin: `+1` or `-1`.
    #[inline]
    pub fn sign(&mut self) -> i64 {
        if self.inner.next_u64() >> 63 == 0 {
            -1
        } else {
            1
        }
    }

    /// Uniform index in `0..n` (Lemire's multiply-shift; `n > 0`).
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.inner.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
