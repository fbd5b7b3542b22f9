//! Seed derivation for independent random streams.
//!
//! Every stream seed is `mix(parent, index)`, where `mix` is built from the
//! SplitMix64 finalizer. Child streams depend only on the parent seed and
//! their own index, so appending streams never perturbs existing ones.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `parent`.
pub fn mix(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA).rotate_left(17)))
}
