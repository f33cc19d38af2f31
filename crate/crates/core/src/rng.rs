//! Seeded generators. Every random routine in the crate builds its own
//! generator from an explicit `u64`, so runs are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed (splitmix64 finalizer over `seed` and `stream`).
pub fn derive(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for query `index` of a sweep. Query 0 reuses the global seed so a
/// single-query run lines up with the unconditional pipeline.
pub fn query_seed(seed: u64, index: usize) -> u64 {
    if index == 0 {
        seed
    } else {
        derive(seed, 0x5157_0000 + index as u64)
    }
}
