//! Counting Bloom filter with 8-bit counters.
//!
//! Probe positions use double hashing, `g_i(x) = h1(x) + i * h2(x) mod m`,
//! with `h1`/`h2` the two halves of one seeded 64-bit hash. A counter that
//! reaches 255 becomes sticky and is never decremented again, trading a few
//! extra false positives for never producing a false negative.

use std::collections::HashSet;

pub const DEFAULT_NUM_HASHES: u32 = 5;

/// 64-bit finalizer (splitmix64). Good avalanche, no state.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded hash of an item id.
pub fn seeded_hash(item: u64, seed: u64) -> u64 {
    mix64(item ^ mix64(seed))
}

/// Expected false positive ratio of `counters` counters holding `capacity`
/// items with `num_hashes` probes.
pub fn expected_fpr(capacity: usize, counters: usize, num_hashes: u32) -> f64 {
    let h = num_hashes as f64;
    (1.0 - (-h * capacity as f64 / counters as f64).exp()).powf(h)
}

/// Smallest counter count whose expected false positive ratio at
/// `capacity` items is at most `target_fpr`.
pub fn size_for_target_fpr(capacity: usize, target_fpr: f64, num_hashes: u32) -> usize {
    assert!(
        target_fpr > 0.0 && target_fpr < 1.0,
        "target fpr must lie in (0, 1)"
    );
    assert!(capacity >= 1 && num_hashes >= 1);
    let ok = |m: usize| expected_fpr(capacity, m, num_hashes) <= target_fpr;
    // the ratio decreases in m; grow an upper bound, then bisect
    let mut hi = capacity.max(1);
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingBloomFilter {
    counters: Vec<u8>,
    num_hashes: u32,
    seed: u64,
    sticky: HashSet<usize>,
}

impl CountingBloomFilter {
    pub fn new(num_counters: usize, num_hashes: u32, seed: u64) -> Self {
        assert!(num_counters > 0 && num_hashes > 0);
        Self {
            counters: vec![0; num_counters],
            num_hashes,
            seed,
            sticky: HashSet::new(),
        }
    }

    /// A filter sized for `capacity` items at `target_fpr`.
    pub fn with_target(capacity: usize, target_fpr: f64, num_hashes: u32, seed: u64) -> Self {
        Self::new(
            size_for_target_fpr(capacity, target_fpr, num_hashes),
            num_hashes,
            seed,
        )
    }

    pub fn num_counters(&self) -> usize {
        self.counters.len()
    }

    pub fn num_hashes(&self) -> u32 {
        self.num_hashes
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }

    fn probes(&self, item: u64) -> impl Iterator<Item = usize> {
        let h = seeded_hash(item, self.seed);
        let h1 = h & 0xffff_ffff;
        let h2 = (h >> 32) | 1;
        let m = self.counters.len() as u64;
        (0..self.num_hashes as u64).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) % m) as usize)
    }

    pub fn insert(&mut self, item: u64) {
        let idx: Vec<usize> = self.probes(item).collect();
        for i in idx {
            let c = &mut self.counters[i];
            if *c < u8::MAX {
                *c += 1;
                if *c == u8::MAX {
                    self.sticky.insert(i);
                }
            }
        }
    }

    /// Undoes one earlier `insert` of the same item.
    pub fn remove(&mut self, item: u64) {
        let idx: Vec<usize> = self.probes(item).collect();
        for i in idx {
            if self.sticky.contains(&i) {
                continue;
            }
            let c = &mut self.counters[i];
            debug_assert!(*c > 0, "counter underflow: removing an item never inserted");
            *c = c.saturating_sub(1);
        }
    }

    pub fn query(&self, item: u64) -> bool {
        self.probes(item).all(|i| self.counters[i] > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizing_examples() {
        let m = size_for_target_fpr(1000, 0.02, 5);
        assert!((8180..=8182).contains(&m), "{m}");
        assert_eq!(size_for_target_fpr(1, 0.5, 1), 2);
        let m2 = size_for_target_fpr(2000, 0.02, 5);
        let ratio = m2 as f64 / m as f64;
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn sizing_is_minimal() {
        for (s, f, h) in [(1000, 0.02, 5), (10, 0.1, 3), (500, 0.001, 7)] {
            let m = size_for_target_fpr(s, f, h);
            assert!(expected_fpr(s, m, h) <= f);
            assert!(expected_fpr(s, m - 1, h) > f);
        }
    }

    #[test]
    fn basic_membership() {
        let mut f = CountingBloomFilter::new(64, 3, 7);
        assert!(!f.query(42));
        f.insert(42);
        assert!(f.query(42));
        f.remove(42);
        assert!(!f.query(42));
        assert!(f.counters().iter().all(|&c| c == 0));
    }

    #[test]
    fn saturated_counters_stick() {
        let mut f = CountingBloomFilter::new(8, 1, 0);
        for _ in 0..300 {
            f.insert(1);
        }
        for _ in 0..300 {
            f.remove(1);
        }
        // the counter saturated, so the item still reads as present
        assert!(f.query(1));
    }

    #[test]
    fn empirical_fpr_at_capacity() {
        let mut f = CountingBloomFilter::with_target(1000, 0.02, 5, 11);
        assert_eq!(f.num_counters(), size_for_target_fpr(1000, 0.02, 5));
        for i in 0..1000u64 {
            f.insert(i);
        }
        let fp = (1_000_000..1_100_000u64).filter(|&x| f.query(x)).count();
        let rate = fp as f64 / 100_000.0;
        assert!((0.01..=0.04).contains(&rate), "{rate}");
    }

    #[test]
    fn no_false_negatives_under_churn() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut f = CountingBloomFilter::new(2048, 5, 99);
        let mut live: Vec<u64> = Vec::new();
        for _ in 0..100_000 {
            match rng.random_range(0..3) {
                0 => {
                    let x = rng.random_range(0..5000u64);
                    f.insert(x);
                    live.push(x);
                }
                1 if !live.is_empty() => {
                    let i = rng.random_range(0..live.len());
                    f.remove(live.swap_remove(i));
                }
                _ => {
                    if !live.is_empty() {
                        let x = live[rng.random_range(0..live.len())];
                        assert!(f.query(x));
                    }
                }
            }
        }
        assert!(live.iter().all(|&x| f.query(x)));
    }

    #[test]
    fn deterministic_for_seed() {
        let ops = |seed| {
            let mut f = CountingBloomFilter::new(512, 5, seed);
            for x in 0..200u64 {
                f.insert(x * 31);
            }
            for x in 0..50u64 {
                f.remove(x * 31);
            }
            f
        };
        assert_eq!(ops(3), ops(3));
        assert_ne!(ops(3).counters(), ops(4).counters());
    }
}
