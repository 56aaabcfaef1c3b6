//! Deterministic random substreams.
//!
//! Every draw in a run comes from a stream keyed by
//! `(run_seed, iteration, purpose, chunk_index)`. The key is hashed with
//! SHA-256 into a ChaCha8 seed, so streams never overlap and results do not
//! depend on how chunks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Number of draws per substream chunk.
pub const CHUNK_LEN: usize = 4096;

/// What a stream is used for within one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Batch consumed by the proposal update.
    Step,
    /// Fresh batch from the current proposal for target-divergence estimates.
    Target,
    /// Reference batch from the current proposal inside the `J` estimator.
    JReference,
    /// Batch from the next proposal inside the `J` estimator.
    JNext,
    /// Anything else (tests, latent resampling, ...).
    Other(u64),
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Step => 1,
            Purpose::Target => 2,
            Purpose::JReference => 3,
            Purpose::JNext => 4,
            Purpose::Other(x) => 0x1000_0000_0000_0000 ^ x,
        }
    }
}

/// Key identifying a family of chunked substreams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub run_seed: u64,
    pub iteration: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(run_seed: u64, iteration: u64, purpose: Purpose) -> Self {
        Self { run_seed, iteration, purpose }
    }

    /// Generator for chunk `chunk_index` of this stream.
    pub fn chunk(&self, chunk_index: u64) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(b"qd-stream-v1");
        hasher.update(self.run_seed.to_le_bytes());
        hasher.update(self.iteration.to_le_bytes());
        hasher.update(self.purpose.code().to_le_bytes());
        hasher.update(chunk_index.to_le_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest[..32]);
        ChaCha8Rng::from_seed(seed)
    }

    /// Single generator for consumers that do not chunk.
    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk(0)
    }
}
