use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Version tag mixed into every stream key. Changing it changes every stream.
pub const RNG_VERSION: &str = "suppsize-chacha20-v1";

/// The ChaCha20 stream named `label` under `seed`.
///
/// The key is SHA-256 of the version tag, the label and the little-endian
/// seed, so distinct labels give independent streams under one seed.
pub fn stream_rng(seed: u64, label: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(RNG_VERSION.as_bytes());
    h.update([0u8]);
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(key)
}
