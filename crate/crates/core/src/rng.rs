//! Named random streams.
//!
//! A stream is identified by a 64-bit seed and a label. The pair is hashed
//! into a ChaCha key, so identical `(seed, label)` pairs always yield the same
//! draws and streams with different labels are independent of each other and
//! of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        RngStream {
            seed,
            label: label.into(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Child stream labelled `"<parent>/<name>"`.
    pub fn derive(&self, name: impl AsRef<str>) -> RngStream {
        RngStream {
            seed: self.seed,
            label: format!("{}/{}", self.label, name.as_ref()),
        }
    }

    /// Fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update((self.label.len() as u64).to_le_bytes());
        hasher.update(self.label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        ChaCha8Rng::from_seed(key)
    }
}
