//! 0/1 knapsack over integer costs and real profits, as used by the
//! knapsack-based selection strategies. Profits are log-hit weights
//! `w_j = -log2(rho_j)`, which turn the multiplicative miss ratio into an
//! additive quantity: `sum w_j = -log2(prod rho_j)`.

use crate::error::{DssError, Result};
use crate::model::{StoreId, RHO_MAX, RHO_MIN_LOG};

/// Relative slack under which two profit sums count as equal.
const PROFIT_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnapsackItem {
    pub id: StoreId,
    pub profit: f64,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub budget: u64,
    pub items: Vec<KnapsackItem>,
}

impl KnapsackInstance {
    pub fn new(budget: u64, items: Vec<KnapsackItem>) -> Result<Self> {
        for it in &items {
            if it.cost == 0 {
                return Err(DssError::InvalidCost {
                    id: it.id,
                    cost: 0.0,
                });
            }
            if !it.profit.is_finite() || it.profit < 0.0 {
                return Err(DssError::Config(format!(
                    "item {}: profit {} must be finite and nonnegative",
                    it.id, it.profit
                )));
            }
        }
        Ok(Self { budget, items })
    }

    pub fn profit_of(&self, ids: &[StoreId]) -> f64 {
        self.items
            .iter()
            .filter(|it| ids.contains(&it.id))
            .map(|it| it.profit)
            .sum()
    }

    pub fn cost_of(&self, ids: &[StoreId]) -> u64 {
        self.items
            .iter()
            .filter(|it| ids.contains(&it.id))
            .map(|it| it.cost)
            .sum()
    }
}

/// Any algorithm that returns a feasible subset of a knapsack instance.
pub trait KnapsackSolver {
    /// Ids of the chosen items, sorted ascending.
    fn solve(&self, instance: &KnapsackInstance) -> Vec<StoreId>;
}

/// Pseudo-polynomial dynamic program, `O(n * B)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolver;

/// Greedy by profit density with the first-violator fallback; at least half
/// the optimal profit.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedySolver;

impl KnapsackSolver for ExactSolver {
    fn solve(&self, instance: &KnapsackInstance) -> Vec<StoreId> {
        solve_exact(instance)
    }
}

impl KnapsackSolver for GreedySolver {
    fn solve(&self, instance: &KnapsackInstance) -> Vec<StoreId> {
        solve_greedy2(instance)
    }
}

/// `-log2(rho)`. Only defined on the open unit interval.
pub fn log_hit_weight(rho: f64) -> Result<f64> {
    if rho > 0.0 && rho < 1.0 {
        Ok(-rho.log2())
    } else {
        Err(DssError::WeightDomain(rho))
    }
}

/// Weight for a model ratio, clamping 0 and 1 into the log's domain.
pub(crate) fn clamped_weight(rho: f64) -> f64 {
    -rho.clamp(RHO_MIN_LOG, RHO_MAX).log2()
}

pub fn solve_exact(instance: &KnapsackInstance) -> Vec<StoreId> {
    let mut items = instance.items.clone();
    items.sort_by_key(|it| it.id);
    let n = items.len();
    let cap = instance.budget.min(items.iter().map(|it| it.cost).sum()) as usize;

    // best[i][b]: max profit from items[i..] with budget b. Filling from the
    // back lets the reconstruction walk ids upward and take an item whenever
    // that stays optimal, which yields the lexicographically smallest
    // optimal id set.
    let width = cap + 1;
    let mut best = vec![0.0f64; (n + 1) * width];
    for i in (0..n).rev() {
        let c = items[i].cost as usize;
        for b in 0..width {
            let skip = best[(i + 1) * width + b];
            let take = if c <= b {
                items[i].profit + best[(i + 1) * width + b - c]
            } else {
                f64::NEG_INFINITY
            };
            best[i * width + b] = skip.max(take);
        }
    }

    let mut chosen = Vec::new();
    let mut b = cap;
    for (i, it) in items.iter().enumerate() {
        let c = it.cost as usize;
        if c > b {
            continue;
        }
        let target = best[i * width + b];
        let take = it.profit + best[(i + 1) * width + b - c];
        if take >= target - PROFIT_TIE_EPS * target.abs().max(1.0) {
            chosen.push(it.id);
            b -= c;
        }
    }
    chosen
}

pub fn solve_greedy2(instance: &KnapsackInstance) -> Vec<StoreId> {
    let budget = instance.budget;
    let mut items: Vec<KnapsackItem> = instance
        .items
        .iter()
        .copied()
        .filter(|it| it.cost <= budget)
        .collect();
    items.sort_by(|a, b| {
        let da = a.profit / a.cost as f64;
        let db = b.profit / b.cost as f64;
        db.total_cmp(&da).then(a.id.cmp(&b.id))
    });

    let mut prefix = Vec::new();
    let mut spent = 0u64;
    let mut profit = 0.0;
    let mut violator = None;
    for it in &items {
        if spent + it.cost <= budget {
            spent += it.cost;
            profit += it.profit;
            prefix.push(it.id);
        } else {
            violator = Some(*it);
            break;
        }
    }
    if let Some(v) = violator {
        if v.profit > profit {
            return vec![v.id];
        }
    }
    prefix.sort_unstable();
    prefix
}
