use crate::cbf::seeded_hash;
use crate::model::StoreId;

/// The `k` stores an item may live in: the top `k` of `hash(item, store)`
/// over all stores (rendezvous hashing), returned sorted by id.
pub fn designated_stores(item: u64, k: usize, stores: &[StoreId]) -> Vec<StoreId> {
    assert!(k <= stores.len(), "k = {k} exceeds {} stores", stores.len());
    let mut scored: Vec<(u64, StoreId)> = stores
        .iter()
        .map(|&s| (seeded_hash(item, s as u64), s))
        .collect();
    scored.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<StoreId> = scored[..k].iter().map(|&(_, s)| s).collect();
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_stores_when_k_is_n() {
        let ids: Vec<StoreId> = (0..7).collect();
        assert_eq!(designated_stores(99, 7, &ids), ids);
        assert!(designated_stores(99, 0, &ids).is_empty());
    }

    #[test]
    fn deterministic() {
        let ids: Vec<StoreId> = (0..19).collect();
        for item in 0..100 {
            let a = designated_stores(item, 3, &ids);
            assert_eq!(a, designated_stores(item, 3, &ids));
            assert_eq!(a.len(), 3);
            assert!(a.windows(2).all(|w| w[0] < w[1]));
        }
    }

    fn loads(items: u64) -> Vec<f64> {
        let ids: Vec<StoreId> = (0..19).collect();
        let mut load = vec![0.0; 19];
        for item in 0..items {
            for s in designated_stores(item, 3, &ids) {
                load[s] += 1.0;
            }
        }
        load
    }

    #[test]
    fn load_passes_chi_square() {
        let expected = 10_000.0 * 3.0 / 19.0;
        let chi2: f64 = loads(10_000)
            .iter()
            .map(|l| (l - expected).powi(2) / expected)
            .sum();
        // 18 degrees of freedom, 0.999 quantile
        assert!(chi2 < 42.3, "{chi2}");
    }

    #[test]
    fn load_within_five_percent() {
        // at 1e5 items one standard deviation is under 1% of the mean
        let expected = 100_000.0 * 3.0 / 19.0;
        for l in loads(100_000) {
            assert!((l - expected).abs() <= 0.05 * expected, "{l} vs {expected}");
        }
    }

    #[test]
    fn nested_in_k() {
        let ids: Vec<StoreId> = (0..19).collect();
        for item in 0..50 {
            let small = designated_stores(item, 2, &ids);
            let big = designated_stores(item, 5, &ids);
            assert!(small.iter().all(|s| big.contains(s)));
        }
    }
}
