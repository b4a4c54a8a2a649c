//! Deterministic random streams.
//!
//! Every random draw in the engine comes from a [`SeededRng`], a ChaCha20
//! generator. Named streams are derived from a master seed as
//!
//! ```text
//! key = SHA-256("qsg/stream/v1" || 0x00 || master_seed as u64 LE || label UTF-8)
//! ```
//!
//! and the 32-byte digest is used verbatim as the ChaCha20 key. Any stream can
//! therefore be replayed from `(master_seed, label)` alone, independently of
//! how many draws other streams consumed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

const STREAM_DOMAIN: &[u8] = b"qsg/stream/v1";

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    label: Option<String>,
    inner: ChaCha20Rng,
}

impl SeededRng {
    /// A bare stream keyed by `seed` (equivalent to the empty label).
    pub fn new(seed: u64) -> Self {
        let mut rng = Self::derive(seed, "");
        rng.label = None;
        rng
    }

    /// The stream named `label` under `master_seed`.
    pub fn derive(master_seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(STREAM_DOMAIN);
        hasher.update([0u8]);
        hasher.update(master_seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Self {
            seed: master_seed,
            label: Some(label.to_owned()),
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }

    /// `true` with probability `p` (clamped to `[0, 1]`).
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() needs a nonempty range");
        let n = n as u64;
        // Rejection zone keeps the draw exactly uniform.
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let x = self.inner.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
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
