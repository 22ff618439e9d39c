//! Seed derivation.
//!
//! Every stage draws from its own stream, derived from the master seed and a
//! stage label, so adding a stage never shifts another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a sub-seed from `seed` and a textual label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output has 32 bytes"))
}

/// Derives a sub-seed from `seed`, a label and an index (restart, run, round...).
pub fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    derive_seed(seed, &format!("{label}#{index}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hex SHA-256 of a byte string.
pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_separate_streams() {
        assert_ne!(derive_seed(7, "kmeans"), derive_seed(7, "gmm"));
        assert_eq!(derive_seed(7, "kmeans"), derive_seed(7, "kmeans"));
        assert_ne!(derive_indexed(7, "restart", 0), derive_indexed(7, "restart", 1));
    }
}
