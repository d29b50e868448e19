//! Counter-based derivation of independent RNG substreams.
//!
//! Every randomized component draws from a ChaCha stream keyed by a master
//! seed plus a short index path (replication number, purpose tag, ...).
//! Distinct paths select distinct cipher keys, so results never depend on
//! how work is scheduled across threads.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Path tag for the data-generation stream of one replication.
pub const STREAM_DATA: u64 = 1;
/// Path tag for the privacy-noise stream of one replication.
pub const STREAM_PRIVACY: u64 = 2;
/// Path tag for the bootstrap-multiplier stream of one replication.
pub const STREAM_BOOTSTRAP: u64 = 3;

/// RNG for the substream identified by `(master_seed, path)`.
///
/// The seed, up to two path indices, and the path length are written
/// verbatim into the four words of the 256-bit ChaCha key; the length
/// word keeps zero-padded short paths distinct from longer ones.
pub fn substream(master_seed: u64, path: &[u64]) -> ChaCha8Rng {
    assert!(path.len() <= 2, "substream path is limited to 2 indices");
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    for (slot, index) in path.iter().enumerate() {
        key[8 * (slot + 1)..8 * (slot + 2)].copy_from_slice(&index.to_le_bytes());
    }
    key[24..].copy_from_slice(&(path.len() as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Collapses `(master_seed, path)` into a single seed for components that
/// accept only a `u64` (for example a bootstrap configuration), which then
/// derive their own substreams from it.
pub fn fold_seed(master_seed: u64, path: &[u64]) -> u64 {
    let mut acc = splitmix64(master_seed);
    for &index in path {
        acc = splitmix64(acc ^ splitmix64(index));
    }
    acc
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
