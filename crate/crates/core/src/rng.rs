/// Derives an independent child seed from `root` and a stream number
/// (SplitMix64 finalizer over both inputs).
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Named streams so independent components never share a seed.
pub mod stream {
    pub const POOL: u64 = 1;
    pub const SUBSETS: u64 = 2;
    pub const DROPOUT: u64 = 3;
    pub const TRAINER: u64 = 4;
    pub const RANDOM_POLICY: u64 = 5;
    pub const POOL_SELECT: u64 = 6;
}
