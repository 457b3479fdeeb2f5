//! Partition, generate, merge.
//!
//! Candidates are split into cost classes `[2^j, 2^(j+1))`, `j < r` with
//! `r = ceil(log2 beta)`. Each class contributes every prefix of its
//! ratio-sorted members. Adjacent classes are then merged pairwise up a
//! binary tree; a merged node keeps, for every dyadic cost range
//! `[2^(t-1), 2^t)` with `t = 1..=r`, the union of one child candidate from
//! each side with the lowest miss ratio, plus the empty set. The root's best
//! candidate by `phi` is at most `2 log2(beta)` times the optimum.
//!
//! Stores costing `2^r >= beta` or more are never part of an optimal answer
//! (the empty set already costs `beta`) and fall outside every class.

use std::cmp::Ordering;

use crate::error::{DssError, Result};
use crate::model::{DatastoreProfile, SelectionContext, StoreId};

#[derive(Debug, Clone, PartialEq)]
pub struct PgmCandidate {
    /// Sorted ascending.
    pub members: Vec<StoreId>,
    pub cost: f64,
    pub rho: f64,
}

impl PgmCandidate {
    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
            cost: 0.0,
            rho: 1.0,
        }
    }

    fn union(a: &Self, b: &Self) -> Self {
        let mut members = Vec::with_capacity(a.members.len() + b.members.len());
        members.extend_from_slice(&a.members);
        members.extend_from_slice(&b.members);
        members.sort_unstable();
        Self {
            members,
            cost: a.cost + b.cost,
            rho: a.rho * b.rho,
        }
    }
}

/// One node of the merge tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmLevel {
    pub level: u32,
    pub index: usize,
    /// Ids of the stores whose cost falls in this node's range, sorted.
    pub partition: Vec<StoreId>,
    pub candidates: Vec<PgmCandidate>,
}

/// `t` such that `cost` lies in `[2^(t-1), 2^t)`; 0 for the empty set.
fn cost_range(cost: f64) -> u32 {
    if cost < 1.0 {
        0
    } else {
        cost.log2().floor() as u32 + 1
    }
}

fn log_classes(beta: f64) -> Result<u32> {
    if beta < 2.0 {
        return Err(DssError::PenaltyTooSmall(beta));
    }
    Ok(beta.log2().ceil() as u32)
}

/// Merges two children's candidate lists into their parent's.
pub fn merge_candidates(
    left: &[PgmCandidate],
    right: &[PgmCandidate],
    r: u32,
) -> Vec<PgmCandidate> {
    let mut slots: Vec<Option<PgmCandidate>> = vec![None; r as usize + 1];
    for a in left {
        for b in right {
            let t = cost_range(a.cost + b.cost);
            if t == 0 || t > r {
                continue;
            }
            let u = PgmCandidate::union(a, b);
            let slot = &mut slots[t as usize];
            let better = match slot {
                None => true,
                Some(cur) => {
                    u.rho
                        .total_cmp(&cur.rho)
                        .then(u.cost.total_cmp(&cur.cost))
                        .then(u.members.cmp(&cur.members))
                        == Ordering::Less
                }
            };
            if better {
                *slot = Some(u);
            }
        }
    }
    let mut out = vec![PgmCandidate::empty()];
    out.extend(slots.into_iter().flatten());
    out
}

fn generate(mut members: Vec<DatastoreProfile>) -> Vec<PgmCandidate> {
    members.sort_by(|a, b| a.mis_ratio.total_cmp(&b.mis_ratio).then(a.id.cmp(&b.id)));
    let mut out = vec![PgmCandidate::empty()];
    let mut cur = PgmCandidate::empty();
    for p in members {
        cur.members.push(p.id);
        cur.cost += p.access_cost;
        cur.rho *= p.mis_ratio;
        let mut c = cur.clone();
        c.members.sort_unstable();
        out.push(c);
    }
    out
}

/// Every level of the merge tree, leaves first; the last level holds the
/// root alone.
pub fn pgm_tree(ctx: &SelectionContext) -> Result<Vec<Vec<PgmLevel>>> {
    let r = log_classes(ctx.miss_penalty())?;
    let mut classes: Vec<Vec<DatastoreProfile>> = vec![Vec::new(); r as usize];
    for p in ctx.candidates() {
        let j = cost_range(p.access_cost) - 1;
        if j < r {
            classes[j as usize].push(*p);
        }
    }

    let leaves: Vec<PgmLevel> = classes
        .into_iter()
        .enumerate()
        .map(|(j, members)| {
            let mut partition: Vec<StoreId> = members.iter().map(|p| p.id).collect();
            partition.sort_unstable();
            PgmLevel {
                level: 0,
                index: j,
                partition,
                candidates: generate(members),
            }
        })
        .collect();

    let mut tree = vec![leaves];
    while tree.last().unwrap().len() > 1 {
        let below = tree.last().unwrap();
        let level = below[0].level + 1;
        let mut nodes = Vec::with_capacity(below.len().div_ceil(2));
        for (index, pair) in below.chunks(2).enumerate() {
            let node = match pair {
                [a, b] => {
                    let mut partition = [a.partition.as_slice(), b.partition.as_slice()].concat();
                    partition.sort_unstable();
                    PgmLevel {
                        level,
                        index,
                        partition,
                        candidates: merge_candidates(&a.candidates, &b.candidates, r),
                    }
                }
                // odd width: pair with an empty partition whose only
                // candidate is ∅; the union keeps one entry per range
                [a] => PgmLevel {
                    level,
                    index,
                    partition: a.partition.clone(),
                    candidates: merge_candidates(&a.candidates, &[PgmCandidate::empty()], r),
                },
                _ => unreachable!(),
            };
            nodes.push(node);
        }
        tree.push(nodes);
    }
    Ok(tree)
}

pub fn select_pgm(ctx: &SelectionContext) -> Result<Vec<StoreId>> {
    if ctx.is_empty() {
        return Ok(Vec::new());
    }
    let tree = pgm_tree(ctx)?;
    let root = &tree.last().unwrap()[0];
    let mut best: Option<(f64, &PgmCandidate)> = None;
    for cand in &root.candidates {
        let phi = ctx.evaluate(&cand.members).total;
        let better = match best {
            None => true,
            Some((bphi, b)) => {
                phi.total_cmp(&bphi)
                    .then(cand.cost.total_cmp(&b.cost))
                    .then(cand.members.cmp(&b.members))
                    == Ordering::Less
            }
        };
        if better {
            best = Some((phi, cand));
        }
    }
    Ok(best.map(|(_, c)| c.members.clone()).unwrap_or_default())
}
