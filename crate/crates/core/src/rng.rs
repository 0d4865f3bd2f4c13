//! Portable seeded randomness.
//!
//! Every random decision (fold shuffles, seed sampling, the random
//! baseline, synthetic workloads) draws from [`Rng`], which pins the whole
//! chain so other implementations can reproduce it bit for bit:
//!
//! * state: xoshiro256** seeded from a `u64` by four SplitMix64 outputs;
//! * `below(n)`: draw `x = next_u64()`, reject while
//!   `x >= u64::MAX - u64::MAX % n`, return `x % n`;
//! * `unit_f64()`: `(next_u64() >> 11) * 2^-53`;
//! * `shuffle`: Fisher-Yates from the last index down, `j = below(i + 1)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct Rng(Xoshiro256StarStar);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return (x % n) as usize;
            }
        }
    }

    /// Uniform float in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `count` distinct indices from `0..n` (partial Fisher-Yates), in
    /// draw order.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        let count = count.min(n);
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight transcription of the published reference algorithms.
    struct Reference {
        s: [u64; 4],
    }

    impl Reference {
        fn new(mut seed: u64) -> Self {
            let mut splitmix = || {
                seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mut z = seed;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                z ^ (z >> 31)
            };
            Reference {
                s: [splitmix(), splitmix(), splitmix(), splitmix()],
            }
        }

        fn next(&mut self) -> u64 {
            let s = &mut self.s;
            let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
            let t = s[1] << 17;
            s[2] ^= s[0];
            s[3] ^= s[1];
            s[1] ^= s[2];
            s[0] ^= s[3];
            s[2] ^= t;
            s[3] = s[3].rotate_left(45);
            result
        }
    }

    #[test]
    fn matches_reference_generator() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let mut ours = Rng::new(seed);
            let mut reference = Reference::new(seed);
            for _ in 0..64 {
                assert_eq!(ours.next_u64(), reference.next());
            }
        }
    }

    #[test]
    fn splitmix_known_vector() {
        // First SplitMix64 output for seed 0.
        assert_eq!(Reference::new(0).s[0], 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = Rng::new(3);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[rng.below(7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::new(9);
        let mut v: Vec<u32> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn sample_indices_distinct() {
        let mut rng = Rng::new(1);
        let s = rng.sample_indices(10, 4);
        assert_eq!(s.len(), 4);
        let set: std::collections::BTreeSet<_> = s.iter().collect();
        assert_eq!(set.len(), 4);
        assert_eq!(rng.sample_indices(3, 10).len(), 3);
    }

    #[test]
    fn unit_interval() {
        let mut rng = Rng::new(5);
        for _ in 0..1000 {
            let x = rng.unit_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
