//! Data store selection strategies.
//!
//! Every strategy maps a [`SelectionContext`] to a subset of its candidate
//! ids, returned sorted ascending. All ties are broken by id so identical
//! contexts always produce identical selections.

use std::fmt;
use std::str::FromStr;

use crate::error::{DssError, Result};
use crate::knapsack::ExactSolver;
use crate::model::{SelectionContext, StoreId};

mod exhaustive;
mod knapsack_based;
mod pgm;
mod pot;

pub use exhaustive::{select_exhaustive, EXHAUSTIVE_LIMIT};
pub use knapsack_based::{dsalg_knap_candidates, select_dsalg_knap, select_dsalg_pp};
pub use pgm::{merge_candidates, pgm_tree, select_pgm, PgmCandidate, PgmLevel};
pub use pot::{pot_approximation_ratio, select_pot, PotentialState};

/// Strategies that decide from the context alone (no ground truth).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Cheapest positive indication.
    Cpi,
    /// Every positive indication.
    Epi,
    /// Potential-minimizing prefix of the ratio-sorted candidates.
    Pot,
    /// Budget sweep with an exact knapsack per budget.
    DsalgPp,
    /// Greedy-knapsack candidate family.
    DsalgKnap,
    /// Partition, generate, merge.
    Pgm,
    /// Enumerates every subset; small contexts only.
    Exhaustive,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Cpi,
        Strategy::Epi,
        Strategy::Pot,
        Strategy::DsalgPp,
        Strategy::DsalgKnap,
        Strategy::Pgm,
        Strategy::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Cpi => "cpi",
            Strategy::Epi => "epi",
            Strategy::Pot => "pot",
            Strategy::DsalgPp => "pp",
            Strategy::DsalgKnap => "umb",
            Strategy::Pgm => "pgm",
            Strategy::Exhaustive => "opt",
        }
    }

    pub fn select(self, ctx: &SelectionContext) -> Result<Vec<StoreId>> {
        match self {
            Strategy::Cpi => Ok(select_cpi(ctx)),
            Strategy::Epi => Ok(select_epi(ctx)),
            Strategy::Pot => Ok(select_pot(ctx)),
            Strategy::DsalgPp => select_dsalg_pp(ctx, &ExactSolver),
            Strategy::DsalgKnap => Ok(select_dsalg_knap(ctx)),
            Strategy::Pgm => select_pgm(ctx),
            Strategy::Exhaustive => select_exhaustive(ctx),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = DssError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "cpi" => Strategy::Cpi,
            "epi" => Strategy::Epi,
            "pot" => Strategy::Pot,
            "pp" | "dsalg_pp" => Strategy::DsalgPp,
            "umb" | "knap" | "dsalg_knap" => Strategy::DsalgKnap,
            "pgm" => Strategy::Pgm,
            "opt" | "exhaustive" => Strategy::Exhaustive,
            other => return Err(DssError::Config(format!("unknown strategy '{other}'"))),
        })
    }
}

/// The single cheapest candidate, lowest id on ties.
pub fn select_cpi(ctx: &SelectionContext) -> Vec<StoreId> {
    ctx.candidates()
        .iter()
        .min_by(|a, b| {
            a.access_cost
                .total_cmp(&b.access_cost)
                .then(a.id.cmp(&b.id))
        })
        .map(|p| vec![p.id])
        .unwrap_or_default()
}

/// All candidates.
pub fn select_epi(ctx: &SelectionContext) -> Vec<StoreId> {
    let mut ids: Vec<StoreId> = ctx.candidates().iter().map(|p| p.id).collect();
    ids.sort_unstable();
    ids
}

/// Keeps the running minimum of `phi`; earlier candidates win ties.
pub(crate) struct ArgminPhi<'a> {
    ctx: &'a SelectionContext,
    best: Vec<StoreId>,
    best_phi: f64,
}

impl<'a> ArgminPhi<'a> {
    /// Starts from the empty selection, `phi = beta`.
    pub(crate) fn new(ctx: &'a SelectionContext) -> Self {
        Self {
            ctx,
            best: Vec::new(),
            best_phi: ctx.miss_penalty(),
        }
    }

    pub(crate) fn offer(&mut self, mut ids: Vec<StoreId>) {
        ids.sort_unstable();
        let phi = self.ctx.evaluate(&ids).total;
        if phi < self.best_phi {
            self.best_phi = phi;
            self.best = ids;
        }
    }

    pub(crate) fn finish(self) -> Vec<StoreId> {
        self.best
    }
}
