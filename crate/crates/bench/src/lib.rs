//! Input generators shared by the benchmarks.

use fedsched_core::fl_sim::{noniid_histograms, NonIidSpec, NonIidType};
use fedsched_core::pool_select::Candidate;
use fedsched_core::scoring::{cost, ScoreVector};
use fedsched_core::{ClientId, Histogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` candidates with scores uniform in `[3, 7]` at two decimals and
/// cost `2 * score + 5`.
pub fn candidates(n: usize, seed: u64) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let score = f64::from(rng.gen_range(300..=700)) / 100.0;
            Candidate::new(i, score, cost(score, 2.0, 5.0) as u64, ScoreVector::splat(0.5))
        })
        .collect()
}

pub fn pool(kind: NonIidType, clients: usize, seed: u64) -> Vec<(ClientId, Histogram)> {
    let spec = NonIidSpec { kind, n_clients: clients, seed, test_per_class: 0, ..Default::default() };
    noniid_histograms(&spec).expect("valid spec").into_iter().enumerate().map(|(i, h)| (ClientId::from(i), h)).collect()
}
