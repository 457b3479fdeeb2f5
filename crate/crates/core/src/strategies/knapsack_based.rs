use super::ArgminPhi;
use crate::error::{DssError, Result};
use crate::knapsack::{clamped_weight, KnapsackInstance, KnapsackItem, KnapsackSolver};
use crate::model::{DatastoreProfile, SelectionContext, StoreId};

/// Solves one knapsack per budget `B = 0..=M`, with profits `-log2(rho)`
/// and `M = min(sum of costs, floor(beta))`, and keeps the answer with the
/// lowest `phi` (smallest budget on ties). With an exact solver the result
/// is optimal.
///
/// Costs must be integers; fractional costs are rejected, not rounded.
pub fn select_dsalg_pp(
    ctx: &SelectionContext,
    solver: &dyn KnapsackSolver,
) -> Result<Vec<StoreId>> {
    let mut items = Vec::with_capacity(ctx.n_positive());
    for p in ctx.candidates() {
        if p.access_cost.fract() != 0.0 || p.access_cost > u32::MAX as f64 {
            return Err(DssError::NonIntegralCost {
                id: p.id,
                cost: p.access_cost,
            });
        }
        items.push(KnapsackItem {
            id: p.id,
            profit: clamped_weight(p.mis_ratio),
            cost: p.access_cost as u64,
        });
    }
    let total: u64 = items.iter().map(|it| it.cost).sum();
    let max_budget = total.min(ctx.miss_penalty().floor() as u64);

    let mut best = ArgminPhi::new(ctx);
    let mut instance = KnapsackInstance::new(0, items)?;
    for budget in 0..=max_budget {
        instance.budget = budget;
        best.offer(solver.solve(&instance));
    }
    Ok(best.finish())
}

/// Every set the greedy-knapsack strategy considers, `∅` first: for each
/// distinct cost cap `u`, the candidates costing at most `u` are ordered by
/// weight per unit cost, and each prefix and each single element of that
/// order is a candidate.
pub fn dsalg_knap_candidates(ctx: &SelectionContext) -> Vec<Vec<StoreId>> {
    let mut caps: Vec<f64> = ctx.candidates().iter().map(|p| p.access_cost).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();

    let mut out = vec![Vec::new()];
    for u in caps {
        let mut eligible: Vec<(&DatastoreProfile, f64)> = ctx
            .candidates()
            .iter()
            .filter(|p| p.access_cost <= u)
            .map(|p| (p, clamped_weight(p.mis_ratio) / p.access_cost))
            .collect();
        eligible.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.id.cmp(&b.0.id)));
        let mut prefix = Vec::with_capacity(eligible.len());
        for (p, _) in eligible {
            prefix.push(p.id);
            out.push(prefix.clone());
            out.push(vec![p.id]);
        }
    }
    out
}

pub fn select_dsalg_knap(ctx: &SelectionContext) -> Vec<StoreId> {
    let mut best = ArgminPhi::new(ctx);
    for cand in dsalg_knap_candidates(ctx) {
        best.offer(cand);
    }
    best.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::{ExactSolver, GreedySolver};

    fn ctx(stores: &[(f64, f64)], beta: f64) -> SelectionContext {
        SelectionContext::new(
            stores
                .iter()
                .enumerate()
                .map(|(i, &(c, r))| DatastoreProfile::new(i, c, r))
                .collect(),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn pp_takes_both_cheap_reliable_stores() {
        let c = ctx(&[(1.0, 0.02), (1.0, 0.02)], 100.0);
        let d = select_dsalg_pp(&c, &ExactSolver).unwrap();
        assert_eq!(d, vec![0, 1]);
        assert!((c.evaluate(&d).total - 2.04).abs() < 1e-12);
        // budget 1 alone would give 3, budget 0 gives 100
        assert!((c.evaluate(&[0]).total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pp_rejects_fractional_costs() {
        let c = ctx(&[(1.5, 0.2)], 100.0);
        assert!(matches!(
            select_dsalg_pp(&c, &ExactSolver),
            Err(DssError::NonIntegralCost { id: 0, .. })
        ));
    }

    #[test]
    fn pp_accepts_any_solver() {
        let c = ctx(&[(2.0, 0.3), (1.0, 0.6), (3.0, 0.1)], 50.0);
        let exact = select_dsalg_pp(&c, &ExactSolver).unwrap();
        let greedy = select_dsalg_pp(&c, &GreedySolver).unwrap();
        assert!(c.evaluate(&exact).total <= c.evaluate(&greedy).total);
    }

    #[test]
    fn knap_single_store() {
        let c = ctx(&[(1.0, 0.5)], 100.0);
        assert_eq!(select_dsalg_knap(&c), vec![0]);
        assert_eq!(dsalg_knap_candidates(&c), vec![vec![], vec![0], vec![0]]);
    }

    #[test]
    fn knap_candidates_respect_cost_cap() {
        let c = ctx(&[(4.0, 0.1), (1.0, 0.5), (2.0, 0.2)], 100.0);
        let cands = dsalg_knap_candidates(&c);
        // caps 1, 2, 4 with 1, 2, 3 eligible stores, two candidates each
        assert_eq!(cands.len(), 1 + 2 * (1 + 2 + 3));
        assert!(cands[1..3].iter().all(|s| s == &vec![1]));
    }
}
