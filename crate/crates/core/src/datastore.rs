//! An LRU cache fronted by a counting Bloom filter, with an online estimate
//! of its own misindication ratio.

use std::collections::{BTreeMap, HashMap};

use crate::cbf::CountingBloomFilter;
use crate::error::{DssError, Result};
use crate::model::StoreId;

pub const DEFAULT_EPOCH_LEN: u64 = 100;
pub const DEFAULT_EMA_WEIGHT: f64 = 0.1;

/// Fraction of positively-indicated accesses that missed.
///
/// During the first `epoch_len` accesses the estimate is the plain
/// cumulative miss ratio. After that it only changes at epoch boundaries:
/// `est <- weight * epoch_misses / epoch_len + (1 - weight) * est`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimator {
    epoch_len: u64,
    weight: f64,
    epoch_accesses: u64,
    epoch_misses: u64,
    total_accesses: u64,
    total_misses: u64,
    estimate: Option<f64>,
}

impl Default for RhoEstimator {
    fn default() -> Self {
        Self::new(DEFAULT_EPOCH_LEN, DEFAULT_EMA_WEIGHT)
    }
}

impl RhoEstimator {
    pub fn new(epoch_len: u64, weight: f64) -> Self {
        assert!(epoch_len > 0, "epoch length must be positive");
        assert!((0.0..=1.0).contains(&weight), "weight must lie in [0, 1]");
        Self {
            epoch_len,
            weight,
            epoch_accesses: 0,
            epoch_misses: 0,
            total_accesses: 0,
            total_misses: 0,
            estimate: None,
        }
    }

    /// `None` until the first access.
    pub fn estimate(&self) -> Option<f64> {
        self.estimate
    }

    pub fn accesses(&self) -> u64 {
        self.total_accesses
    }

    pub fn record(&mut self, miss: bool) {
        self.total_accesses += 1;
        self.epoch_accesses += 1;
        if miss {
            self.total_misses += 1;
            self.epoch_misses += 1;
        }
        if self.total_accesses <= self.epoch_len {
            self.estimate = Some(self.total_misses as f64 / self.total_accesses as f64);
        }
        if self.epoch_accesses == self.epoch_len {
            self.epoch_rollover();
        }
    }

    fn epoch_rollover(&mut self) {
        // the first epoch's value is already the cumulative ratio
        if self.total_accesses > self.epoch_len {
            let fresh = self.epoch_misses as f64 / self.epoch_len as f64;
            let prev = self.estimate.unwrap_or(fresh);
            self.estimate =
                Some((self.weight * fresh + (1.0 - self.weight) * prev).clamp(0.0, 1.0));
        }
        self.epoch_accesses = 0;
        self.epoch_misses = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessOutcome {
    Hit,
    Miss,
}

#[derive(Debug, Clone)]
pub struct Datastore {
    id: StoreId,
    capacity: usize,
    // item -> recency stamp, and stamp -> item; the smallest stamp is LRU
    stamps: HashMap<u64, u64>,
    order: BTreeMap<u64, u64>,
    next_stamp: u64,
    indicator: CountingBloomFilter,
    estimator: RhoEstimator,
}

impl Datastore {
    pub fn new(
        id: StoreId,
        capacity: usize,
        indicator: CountingBloomFilter,
        estimator: RhoEstimator,
    ) -> Self {
        assert!(capacity > 0, "store capacity must be positive");
        Self {
            id,
            capacity,
            stamps: HashMap::with_capacity(capacity + 1),
            order: BTreeMap::new(),
            next_stamp: 0,
            indicator,
            estimator,
        }
    }

    pub fn id(&self) -> StoreId {
        self.id
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    /// Ground truth, for the perfect-indicator benchmark and for tests.
    pub fn contains(&self, item: u64) -> bool {
        self.stamps.contains_key(&item)
    }

    /// What the store advertises.
    pub fn indicates(&self, item: u64) -> bool {
        self.indicator.query(item)
    }

    pub fn indicator(&self) -> &CountingBloomFilter {
        &self.indicator
    }

    pub fn estimator(&self) -> &RhoEstimator {
        &self.estimator
    }

    /// Items from least to most recently used.
    pub fn lru_order(&self) -> Vec<u64> {
        self.order.values().copied().collect()
    }

    fn touch(&mut self, item: u64) {
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        if let Some(old) = self.stamps.insert(item, stamp) {
            self.order.remove(&old);
        }
        self.order.insert(stamp, item);
    }

    /// Looks the item up after a positive indication. Hits refresh recency;
    /// every outcome feeds the ratio estimator.
    pub fn access(&mut self, item: u64) -> AccessOutcome {
        let outcome = if self.contains(item) {
            self.touch(item);
            AccessOutcome::Hit
        } else {
            AccessOutcome::Miss
        };
        self.estimator.record(outcome == AccessOutcome::Miss);
        outcome
    }

    /// Stores a new item as most recent, evicting the least recent one when
    /// full. The indicator follows both changes.
    pub fn insert(&mut self, item: u64) -> Result<Option<u64>> {
        if self.contains(item) {
            return Err(DssError::DuplicateInsert(item));
        }
        self.touch(item);
        self.indicator.insert(item);
        if self.stamps.len() <= self.capacity {
            return Ok(None);
        }
        let (_, victim) = self.order.pop_first().expect("store is over capacity");
        self.stamps.remove(&victim);
        self.indicator.remove(victim);
        Ok(Some(victim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn store(capacity: usize) -> Datastore {
        Datastore::new(
            0,
            capacity,
            CountingBloomFilter::with_target(capacity, 0.02, 5, 1),
            RhoEstimator::default(),
        )
    }

    #[test]
    fn access_hit_and_miss() {
        let mut s = store(4);
        s.insert(1).unwrap();
        s.insert(2).unwrap();
        assert_eq!(s.lru_order(), vec![1, 2]);
        assert_eq!(s.access(1), AccessOutcome::Hit);
        assert_eq!(s.lru_order(), vec![2, 1]);
        assert_eq!(s.access(9), AccessOutcome::Miss);
        assert_eq!(s.estimator().accesses(), 2);
        assert_eq!(s.estimator().estimate(), Some(0.5));
    }

    #[test]
    fn lru_eviction_trace() {
        let mut s = store(2);
        assert_eq!(s.insert(10).unwrap(), None);
        assert_eq!(s.insert(11).unwrap(), None);
        s.access(10);
        assert_eq!(s.insert(12).unwrap(), Some(11));
        assert!(!s.contains(11));
        assert!(s.indicates(10) && s.indicates(12));
        assert_eq!(s.insert(10), Err(DssError::DuplicateInsert(10)));
    }

    #[test]
    fn estimator_cold_start_is_cumulative() {
        let mut e = RhoEstimator::default();
        assert_eq!(e.estimate(), None);
        for i in 0..10 {
            e.record(i < 3);
        }
        assert!((e.estimate().unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn estimator_epoch_updates() {
        let mut e = RhoEstimator::new(100, 0.1);
        for i in 0..100 {
            e.record(i < 30);
        }
        assert!((e.estimate().unwrap() - 0.3).abs() < 1e-15);
        // mid-epoch accesses leave the estimate alone
        for i in 0..99 {
            e.record(i < 10);
        }
        assert!((e.estimate().unwrap() - 0.3).abs() < 1e-15);
        e.record(false);
        assert!((e.estimate().unwrap() - 0.28).abs() < 1e-12);
    }

    #[test]
    fn estimator_fixed_points() {
        let mut e = RhoEstimator::new(100, 0.1);
        for _ in 0..300 {
            e.record(false);
        }
        assert_eq!(e.estimate(), Some(0.0));
        let mut e = RhoEstimator::new(100, 0.1);
        for _ in 0..300 {
            e.record(true);
        }
        assert_eq!(e.estimate(), Some(1.0));
    }

    #[test]
    fn estimator_converges_on_bernoulli() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &p in &[0.05, 0.3, 0.7] {
            let mut e = RhoEstimator::default();
            for _ in 0..50 * 100 {
                e.record(rng.random_bool(p));
            }
            let est = e.estimate().unwrap();
            assert!((est - p).abs() <= 0.05, "p={p} est={est}");
        }
    }

    #[test]
    fn matches_reference_lru() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut s = store(16);
        let mut reference: Vec<u64> = Vec::new(); // front = least recent
        for _ in 0..10_000 {
            let x = rng.random_range(0..40u64);
            if rng.random_bool(0.5) {
                let hit = s.access(x) == AccessOutcome::Hit;
                assert_eq!(hit, reference.contains(&x));
                if hit {
                    reference.retain(|&y| y != x);
                    reference.push(x);
                }
            } else if !reference.contains(&x) {
                let evicted = s.insert(x).unwrap();
                reference.push(x);
                let expected = if reference.len() > 16 {
                    Some(reference.remove(0))
                } else {
                    None
                };
                assert_eq!(evicted, expected);
            }
            assert_eq!(s.lru_order(), reference);
        }
        for x in s.lru_order() {
            assert!(s.indicates(x));
        }
    }
}
