//! The expected-cost model shared by every strategy and by the simulator.
//!
//! A query for an item produces a set of candidate stores, those whose
//! indicator answered "yes". Accessing a subset `D` of them costs
//!
//! ```text
//! phi(D) = sum_{j in D} c_j + beta * prod_{j in D} rho_j
//! ```
//!
//! where `c_j` is the access cost, `rho_j` the probability that store `j`
//! does not hold the item despite its positive indication, and `beta` the
//! miss penalty. The empty product is 1, so `phi(∅) = beta`.

use std::collections::HashSet;

use crate::error::{DssError, Result};

pub type StoreId = usize;

/// Largest misindication ratio the model carries. A store that never holds
/// anything has ratio exactly 1; it is pinned just below so `-log2(rho)`
/// stays finite.
pub const RHO_MAX: f64 = 1.0 - 1e-12;

/// Smallest ratio fed into a logarithm. Ratio 0 itself is legal in the
/// model; only the knapsack weights clamp it.
pub const RHO_MIN_LOG: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatastoreProfile {
    pub id: StoreId,
    pub access_cost: f64,
    pub mis_ratio: f64,
}

impl DatastoreProfile {
    pub fn new(id: StoreId, access_cost: f64, mis_ratio: f64) -> Self {
        Self {
            id,
            access_cost,
            mis_ratio,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.access_cost.is_finite() || self.access_cost < 1.0 {
            return Err(DssError::InvalidCost {
                id: self.id,
                cost: self.access_cost,
            });
        }
        if !(0.0..1.0).contains(&self.mis_ratio) {
            return Err(DssError::InvalidRatio {
                id: self.id,
                rho: self.mis_ratio,
            });
        }
        Ok(())
    }
}

/// The decision input for one query: stores with a positive indication and
/// the miss penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionContext {
    candidates: Vec<DatastoreProfile>,
    miss_penalty: f64,
}

impl SelectionContext {
    pub fn new(candidates: Vec<DatastoreProfile>, miss_penalty: f64) -> Result<Self> {
        if !miss_penalty.is_finite() || miss_penalty < 1.0 {
            return Err(DssError::InvalidMissPenalty(miss_penalty));
        }
        let mut seen = HashSet::with_capacity(candidates.len());
        for c in &candidates {
            c.validate()?;
            if !seen.insert(c.id) {
                return Err(DssError::DuplicateStore(c.id));
            }
        }
        Ok(Self {
            candidates,
            miss_penalty,
        })
    }

    pub fn candidates(&self) -> &[DatastoreProfile] {
        &self.candidates
    }

    pub fn miss_penalty(&self) -> f64 {
        self.miss_penalty
    }

    pub fn n_positive(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn profile(&self, id: StoreId) -> Option<&DatastoreProfile> {
        self.candidates.iter().find(|c| c.id == id)
    }

    /// Cost of selecting the stores with the given ids. Ids not among the
    /// candidates are ignored.
    pub fn evaluate(&self, ids: &[StoreId]) -> CostBreakdown {
        let mut sorted: Vec<StoreId> = ids.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let chosen: Vec<DatastoreProfile> = sorted
            .iter()
            .filter_map(|id| self.profile(*id).copied())
            .collect();
        expected_cost(&chosen, self.miss_penalty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub access_cost: f64,
    pub miss_ratio: f64,
    pub total: f64,
}

/// Probability that an indicator answers "yes".
pub fn positive_prob(hit_ratio: f64, fpr: f64) -> f64 {
    (hit_ratio + (1.0 - hit_ratio) * fpr).clamp(0.0, 1.0)
}

/// Probability that the item is absent given a positive indication, by
/// Bayes' rule. Clamped into `[0, RHO_MAX]`.
pub fn misindication_ratio(hit_ratio: f64, fpr: f64) -> Result<f64> {
    let denom = hit_ratio + (1.0 - hit_ratio) * fpr;
    if denom <= 0.0 {
        return Err(DssError::UndefinedRatio);
    }
    Ok((fpr * (1.0 - hit_ratio) / denom).clamp(0.0, RHO_MAX))
}

/// `phi` of a selection, summed in the order given.
pub fn expected_cost(selection: &[DatastoreProfile], miss_penalty: f64) -> CostBreakdown {
    let mut access_cost = 0.0;
    let mut miss_ratio = 1.0;
    for p in selection {
        access_cost += p.access_cost;
        miss_ratio *= p.mis_ratio;
    }
    CostBreakdown {
        access_cost,
        miss_ratio,
        total: access_cost + miss_penalty * miss_ratio,
    }
}
