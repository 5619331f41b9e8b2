//! Deterministic random streams.
//!
//! Every Monte Carlo loop in this crate draws its randomness from a ChaCha8
//! stream chosen by `(master seed, domain, index)`. Work can therefore be split
//! across any number of workers and merged without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Stream domains; distinct consumers never share a stream.
pub mod domain {
    pub const CODEBOOK: u64 = 1;
    pub const GENERATOR: u64 = 2;
    pub const ROC_TRIAL: u64 = 3;
    pub const FRAME: u64 = 4;
    pub const TEST: u64 = 0xFFFF;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th stream of `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(domain)));
    rng.set_stream(index);
    rng
}
