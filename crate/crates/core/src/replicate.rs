//! Deterministic seeding and parallel replication.
//!
//! Replicate `r` of a batch seeded with `master` always receives
//! [`derive_seed`]`(master, r)`, whatever the thread count, and results are
//! returned in replicate order.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "FRAGMENTA_THREADS";

/// The pseudo-random generator used throughout.
pub type SimRng = Pcg64Mcg;

pub fn rng_from_seed(seed: u64) -> SimRng {
    Pcg64Mcg::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`: `splitmix64(master ^ splitmix64(index))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `job(index, seed)` for `count` replicates concurrently; output is in
/// index order.
pub fn replicate<T, F>(master: u64, count: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    let run = || {
        (0..count)
            .into_par_iter()
            .map(|r| job(r, derive_seed(master, r as u64)))
            .collect()
    };
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..1000).map(|r| derive_seed(7, r)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        // Pinned: the mix is part of the reproducibility contract.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn replicate_preserves_order() {
        let out = replicate(3, 64, |r, seed| (r, seed));
        for (i, &(r, seed)) in out.iter().enumerate() {
            assert_eq!(i, r);
            assert_eq!(seed, derive_seed(3, i as u64));
        }
    }
}
