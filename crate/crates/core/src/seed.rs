//! Per-cell seed derivation for parameter sweeps.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer. A bijection on `u64`.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix(mix(global) + GOLDEN·(index + 1))`.
///
/// For a fixed global seed the map `index ↦ seed` is injective on all of
/// `u64` (an odd multiplier and a bijective mix), and for a fixed index every
/// change of the global seed changes the result.
pub fn derive_cell_seed(global_seed: u64, cell_index: u64) -> u64 {
    mix(mix(global_seed).wrapping_add(GOLDEN.wrapping_mul(cell_index.wrapping_add(1))))
}
