//! Seeded randomness shared by every sampled procedure.
//!
//! Uniform choices use `next_u64() % k` on a ChaCha8 stream so that a seed
//! reproduces the same draws on every platform and toolchain.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Result};
use crate::model::{default_item_names, Instance};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..k`. `k` must be positive.
pub fn uniform_index(rng: &mut impl RngCore, k: usize) -> usize {
    assert!(k > 0, "cannot choose from an empty set");
    (rng.next_u64() % k as u64) as usize
}

/// Fisher-Yates shuffle driven by [`uniform_index`].
pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Independent child seed for stream `stream` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Impartial culture: every agent draws a uniformly random strict order.
/// Agents are named `1..=n` and items follow [`default_item_names`].
pub fn impartial_culture(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 {
        return input(format!(
            "need at least one agent and one item (got {n} agents, {m} items)"
        ));
    }
    let mut rng = rng_from_seed(seed);
    let orders: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut o: Vec<usize> = (0..m).collect();
            shuffle(&mut rng, &mut o);
            o
        })
        .collect();
    Instance::from_orders(&default_item_names(m), &orders)
}
