//! Closed-form expected costs for the fully homogeneous system: `n` stores,
//! unit access cost, common hit ratio `h` and false positive ratio `fpr`.
//!
//! The number of positive indications is `Binomial(n, q)`, so each policy's
//! expected cost is a weighted sum of `cost_homo(k) = k + beta * rho^k`.

use crate::error::Result;
use crate::format::sig6;
use crate::model::{misindication_ratio, positive_prob, RHO_MAX};

/// Above this many stores binomial coefficients are evaluated in log space.
const EXACT_BINOMIAL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousParams {
    pub n_stores: usize,
    pub hit_ratio: f64,
    pub fpr: f64,
    pub miss_penalty: f64,
    pub q: f64,
    pub rho: f64,
}

impl HomogeneousParams {
    pub fn new(n_stores: usize, hit_ratio: f64, fpr: f64, miss_penalty: f64) -> Result<Self> {
        use crate::error::DssError;
        if n_stores == 0 {
            return Err(DssError::Config("at least one store is required".into()));
        }
        if !(0.0..=1.0).contains(&hit_ratio) || !(0.0..=1.0).contains(&fpr) {
            return Err(DssError::Config(format!(
                "hit ratio {hit_ratio} and fpr {fpr} must lie in [0, 1]"
            )));
        }
        if !miss_penalty.is_finite() || miss_penalty < 1.0 {
            return Err(DssError::InvalidMissPenalty(miss_penalty));
        }
        // h = fpr = 0: no store ever indicates, so rho never enters a cost.
        let rho = misindication_ratio(hit_ratio, fpr).unwrap_or(RHO_MAX);
        Ok(Self {
            n_stores,
            hit_ratio,
            fpr,
            miss_penalty,
            q: positive_prob(hit_ratio, fpr),
            rho,
        })
    }
}

/// Expected cost of accessing `k` stores that all indicated positively.
pub fn cost_homo(k: usize, beta: f64, rho: f64) -> f64 {
    k as f64 + beta * rho.powi(k as i32)
}

/// `Pr(N_x = k)` for `k = 0..=n`.
pub fn nx_distribution(n: usize, q: f64) -> Vec<f64> {
    if q <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if q >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        let mut coeff: u64 = 1;
        (0..=n)
            .map(|k| {
                if k > 0 {
                    // exact: C(n,k) = C(n,k-1) * (n-k+1) / k
                    coeff = coeff * (n - k + 1) as u64 / k as u64;
                }
                coeff as f64 * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32)
            })
            .collect()
    } else {
        let (ln_q, ln_p) = (q.ln(), (1.0 - q).ln());
        let mut ln_coeff = 0.0;
        (0..=n)
            .map(|k| {
                if k > 0 {
                    ln_coeff += ((n - k + 1) as f64 / k as f64).ln();
                }
                (ln_coeff + k as f64 * ln_q + (n - k) as f64 * ln_p).exp()
            })
            .collect()
    }
}

/// Expected cost when every positive indication is accessed.
pub fn epi_cost(p: &HomogeneousParams) -> f64 {
    let n = p.n_stores as f64;
    n * p.q + p.miss_penalty * (1.0 - p.q + p.q * p.rho).powi(p.n_stores as i32)
}

/// Expected cost when one positive indication (if any) is accessed.
pub fn cpi_cost(p: &HomogeneousParams) -> f64 {
    let none = (1.0 - p.q).powi(p.n_stores as i32);
    none * p.miss_penalty + (1.0 - none) * (1.0 + p.miss_penalty * p.rho)
}

/// Optimal number of stores to access out of `k_positive` candidates.
///
/// `cost_homo` is convex over the reals with its minimum at
/// `y* = -ln(-beta ln rho) / ln rho`, so the integer optimum is one of
/// `0`, `k`, `floor(y*)`, `ceil(y*)`. Ties go to the smaller count.
pub fn fpo_access_count(k_positive: usize, beta: f64, rho: f64) -> usize {
    if k_positive == 0 {
        return 0;
    }
    if rho <= 0.0 {
        return 1;
    }
    let mut candidates = vec![0, k_positive];
    if rho < 1.0 {
        let ln_rho = rho.ln();
        let y = -(-beta * ln_rho).ln() / ln_rho;
        if y.is_finite() && y >= 0.0 && y <= k_positive as f64 {
            candidates.push(y.floor() as usize);
            candidates.push(y.ceil() as usize);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut best = candidates[0];
    let mut best_cost = cost_homo(best, beta, rho);
    for &m in &candidates[1..] {
        let c = cost_homo(m, beta, rho);
        if c < best_cost {
            best = m;
            best_cost = c;
        }
    }
    best
}

/// Expected cost of the false-positive-aware optimal policy: for each
/// possible number of positives, access the optimal number of them.
pub fn fpo_cost(p: &HomogeneousParams) -> f64 {
    nx_distribution(p.n_stores, p.q)
        .iter()
        .enumerate()
        .map(|(k, pr)| {
            let m = fpo_access_count(k, p.miss_penalty, p.rho);
            pr * cost_homo(m, p.miss_penalty, p.rho)
        })
        .sum()
}

/// Benchmark cost with false-positive-free indicators.
pub fn perfect_indicator_cost(n: usize, hit: f64, beta: f64) -> f64 {
    let none = (1.0 - hit).powi(n as i32);
    (1.0 - none) + none * beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub hit: f64,
    pub perfect: f64,
    pub fpo: f64,
    pub cpi: f64,
    pub epi: f64,
    pub no_indicator: f64,
}

pub const SWEEP_HEADER: &str = "hit,perfect,fpo,cpi,epi,no_indicator";

/// Evenly spaced hit ratios from 0 to 1 inclusive.
pub fn hit_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(crate::error::DssError::Config(format!(
            "hit step {step} must lie in (0, 1]"
        )));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| (i as f64 * step).min(1.0)).collect();
    if *grid.last().unwrap() < 1.0 - 1e-9 {
        grid.push(1.0);
    }
    Ok(grid)
}

pub fn homogeneous_sweep(n: usize, fpr: f64, beta: f64, hit_grid: &[f64]) -> Result<Vec<SweepRow>> {
    hit_grid
        .iter()
        .map(|&hit| {
            let p = HomogeneousParams::new(n, hit, fpr, beta)?;
            // fpr = 1 makes every indicator say yes: no information at all.
            let blind = HomogeneousParams::new(n, hit, 1.0, beta)?;
            Ok(SweepRow {
                hit,
                perfect: perfect_indicator_cost(n, hit, beta),
                fpo: fpo_cost(&p),
                cpi: cpi_cost(&p),
                epi: epi_cost(&p),
                no_indicator: fpo_cost(&blind),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let cols = [r.hit, r.perfect, r.fpo, r.cpi, r.epi, r.no_indicator].map(sig6);
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}
