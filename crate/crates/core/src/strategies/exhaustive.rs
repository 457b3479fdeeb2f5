use crate::error::{DssError, Result};
use crate::model::{SelectionContext, StoreId};

/// Largest candidate count the exhaustive search accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// The `phi`-minimizing subset over all `2^n` subsets. Ties go to the
/// smaller subset, then to the lexicographically smaller id list.
pub fn select_exhaustive(ctx: &SelectionContext) -> Result<Vec<StoreId>> {
    let n = ctx.n_positive();
    if n > EXHAUSTIVE_LIMIT {
        return Err(DssError::TooManyCandidates(n));
    }
    let mut stores = ctx.candidates().to_vec();
    stores.sort_by_key(|p| p.id);
    let beta = ctx.miss_penalty();

    let mut best_mask = 0u32;
    let mut best_phi = beta;
    for mask in 1u32..(1 << n) {
        // same summation order as SelectionContext::evaluate
        let mut cost = 0.0;
        let mut miss = 1.0;
        for (i, p) in stores.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cost += p.access_cost;
                miss *= p.mis_ratio;
            }
        }
        let phi = cost + beta * miss;
        let better = phi < best_phi
            || phi == best_phi && {
                let (a, b) = (mask.count_ones(), best_mask.count_ones());
                a < b || a == b && lex_less(mask, best_mask)
            };
        if better {
            best_phi = phi;
            best_mask = mask;
        }
    }
    Ok((0..n)
        .filter(|i| best_mask >> i & 1 == 1)
        .map(|i| stores[i].id)
        .collect())
}

/// Compares two equal-size subsets of id-sorted positions as id lists.
fn lex_less(a: u32, b: u32) -> bool {
    // the first differing position decides; the set holding it is smaller
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}
