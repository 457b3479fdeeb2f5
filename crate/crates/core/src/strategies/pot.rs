use crate::model::{DatastoreProfile, SelectionContext, StoreId};

/// Prefix sums behind the potential-function strategy.
///
/// `order` lists candidates by nondecreasing misindication ratio (ties by
/// id). `low[k]` and `high[k]` are the sums of the `k` smallest and `k`
/// largest access costs among all candidates, independent of `order`.
/// `potential[k] = low[k] + beta * prod_{j<k} rho(order[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    pub order: Vec<DatastoreProfile>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub potential: Vec<f64>,
}

impl PotentialState {
    pub fn new(ctx: &SelectionContext) -> Self {
        let mut order = ctx.candidates().to_vec();
        order.sort_by(|a, b| a.mis_ratio.total_cmp(&b.mis_ratio).then(a.id.cmp(&b.id)));

        let mut costs: Vec<f64> = order.iter().map(|p| p.access_cost).collect();
        costs.sort_by(f64::total_cmp);
        let prefix = |it: &mut dyn Iterator<Item = &f64>| {
            let mut acc = vec![0.0];
            for c in it {
                acc.push(acc.last().unwrap() + c);
            }
            acc
        };
        let low = prefix(&mut costs.iter());
        let high = prefix(&mut costs.iter().rev());

        let beta = ctx.miss_penalty();
        let mut potential = Vec::with_capacity(order.len() + 1);
        let mut miss = 1.0;
        potential.push(beta);
        for (k, p) in order.iter().enumerate() {
            miss *= p.mis_ratio;
            potential.push(low[k + 1] + beta * miss);
        }
        Self {
            order,
            low,
            high,
            potential,
        }
    }

    /// Prefix length minimizing the potential; shortest on ties.
    pub fn best_prefix(&self) -> usize {
        let mut best = 0;
        for k in 1..self.potential.len() {
            if self.potential[k] < self.potential[best] {
                best = k;
            }
        }
        best
    }
}

pub fn select_pot(ctx: &SelectionContext) -> Vec<StoreId> {
    let state = PotentialState::new(ctx);
    let k = state.best_prefix();
    let mut ids: Vec<StoreId> = state.order[..k].iter().map(|p| p.id).collect();
    ids.sort_unstable();
    ids
}

/// `H_k / L_k`, the guaranteed ratio to the optimum for a size-`k` answer.
/// The empty answer is never worse than the optimum, so `k = 0` gives 1.
pub fn pot_approximation_ratio(ctx: &SelectionContext, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let state = PotentialState::new(ctx);
    state.high[k] / state.low[k]
}
