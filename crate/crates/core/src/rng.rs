//! Seeded random streams.
//!
//! Every Monte Carlo consumer draws from a ChaCha8 stream identified by a
//! 64-bit seed and a 64-bit stream number. Work is split into fixed-size
//! blocks, one stream per block, so results do not depend on how many
//! threads ran the blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type SimRng = ChaCha8Rng;

/// Samples per parallel block.
pub const BLOCK_SIZE: usize = 1 << 14;

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a master seed with a path of labels (cell indices, experiment ids)
/// into a child seed. SplitMix64 finaliser.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    labels.iter().fold(mix(master), |acc, &l| {
        mix(acc.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(l)))
    })
}

/// Runs `body(rng, count)` over `n_samples` split into blocks and returns the
/// per-block results in block order.
pub fn map_blocks<T, F>(seed: u64, n_samples: usize, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, usize) -> T + Sync,
{
    let n_blocks = n_samples.div_ceil(BLOCK_SIZE);
    (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE);
            let mut rng = stream_rng(seed, b as u64);
            body(&mut rng, count)
        })
        .collect()
}
