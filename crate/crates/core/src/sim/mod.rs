//! Trace-driven simulation of clients choosing among indicator-fronted
//! caches spread over a topology.
//!
//! Each request is assigned to a uniformly random client. The client sees
//! which stores' indicators claim the item, builds a selection context from
//! its own access costs and each store's estimated misindication ratio, and
//! accesses every store the strategy picks. A miss costs `beta` and places
//! the item in its `k` designated stores. Results are normalized by a run
//! of the perfect-indicator benchmark on the same trace and client draws.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cbf::{mix64, CountingBloomFilter, DEFAULT_NUM_HASHES};
use crate::datastore::{AccessOutcome, Datastore, RhoEstimator};
use crate::error::{DssError, Result};
use crate::format::sig6;
use crate::model::{DatastoreProfile, SelectionContext, StoreId, RHO_MAX};
use crate::strategies::Strategy;
use crate::topology::{CostMatrix, Topology};

mod placement;
mod trace;

pub use placement::designated_stores;
pub use trace::{load_trace, parse_trace, ZipfTrace};

/// Ratio assumed for a store that has never been accessed.
pub const COLD_START_RHO: f64 = 0.5;

/// Separates the synthetic trace's random stream from the client draws.
const TRACE_STREAM: u64 = 0x7472_6163_6573;

/// A selection strategy, or the ground-truth benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimStrategy {
    /// Perfect indicator: the cheapest store that really holds the item.
    Pi,
    Select(Strategy),
}

impl SimStrategy {
    /// What `bench` runs unless told otherwise.
    pub const DEFAULT_BENCH: [SimStrategy; 6] = [
        SimStrategy::Pi,
        SimStrategy::Select(Strategy::Cpi),
        SimStrategy::Select(Strategy::Epi),
        SimStrategy::Select(Strategy::DsalgKnap),
        SimStrategy::Select(Strategy::Pot),
        SimStrategy::Select(Strategy::Pgm),
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimStrategy::Pi => "pi",
            SimStrategy::Select(s) => s.name(),
        }
    }
}

impl fmt::Display for SimStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimStrategy {
    type Err = DssError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("pi") || s.eq_ignore_ascii_case("perfect") {
            Ok(SimStrategy::Pi)
        } else {
            s.parse().map(SimStrategy::Select)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    File(PathBuf),
    Zipf(ZipfTrace),
}

impl TraceSource {
    /// Synthetic traces draw from a stream derived from `seed`.
    pub fn materialize(&self, seed: u64) -> Result<Vec<u64>> {
        match self {
            TraceSource::File(path) => load_trace(path),
            TraceSource::Zipf(z) => z.generate(mix64(seed ^ TRACE_STREAM)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub strategy: SimStrategy,
    pub miss_penalty: f64,
    pub locations_per_item: usize,
    pub store_capacity: usize,
    pub target_fpr: f64,
    pub alpha: f64,
    /// Bandwidth scale; `None` uses the largest pairwise bottleneck.
    pub big_t: Option<f64>,
    pub seed: u64,
    /// `None` uses the bundled synthetic topology.
    pub topology: Option<PathBuf>,
    pub trace: TraceSource,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            strategy: SimStrategy::Select(Strategy::Cpi),
            miss_penalty: 100.0,
            locations_per_item: 1,
            store_capacity: 1000,
            target_fpr: 0.02,
            alpha: 0.5,
            big_t: None,
            seed: 0,
            topology: None,
            trace: TraceSource::Zipf(ZipfTrace::default()),
        }
    }
}

impl SimConfig {
    pub fn validate(&self, n_stores: usize) -> Result<()> {
        let fail = |m: String| Err(DssError::Config(m));
        if !(self.miss_penalty.is_finite() && self.miss_penalty >= 1.0) {
            return Err(DssError::InvalidMissPenalty(self.miss_penalty));
        }
        if self.locations_per_item < 1 || self.locations_per_item > n_stores {
            return fail(format!(
                "k = {} must lie in [1, {n_stores}]",
                self.locations_per_item
            ));
        }
        if self.store_capacity < 1 {
            return fail("store size must be positive".into());
        }
        if !(self.target_fpr > 0.0 && self.target_fpr < 1.0) {
            return fail(format!("target fpr {} must lie in (0, 1)", self.target_fpr));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha {} must lie in [0, 1]", self.alpha));
        }
        Ok(())
    }

    pub fn load_topology(&self) -> Result<Topology> {
        match &self.topology {
            Some(path) => Topology::load(path),
            None => Ok(Topology::synthetic()),
        }
    }
}

/// The inputs of a run that do not depend on the strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub topology: Topology,
    pub trace: Vec<u64>,
}

impl Workload {
    pub fn load(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            topology: config.load_topology()?,
            trace: config.trace.materialize(config.seed)?,
        })
    }
}

/// Raw accumulators of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTotals {
    pub requests: u64,
    pub access_cost: u64,
    pub misses: u64,
    pub total_cost: f64,
}

/// What happened to one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestRecord {
    pub client: usize,
    pub item: u64,
    pub selected: Vec<StoreId>,
    pub access_cost: u64,
    pub hit: bool,
}

/// The cheapest store, from `client`'s point of view, that holds `item`.
pub fn pi_select(
    costs: &CostMatrix,
    client: usize,
    item: u64,
    stores: &[Datastore],
) -> Vec<StoreId> {
    stores
        .iter()
        .filter(|s| s.contains(item))
        .min_by_key(|s| (costs.get(client, s.id()), s.id()))
        .map(|s| vec![s.id()])
        .unwrap_or_default()
}

fn build_stores(config: &SimConfig, n: usize) -> Vec<Datastore> {
    (0..n)
        .map(|j| {
            let cbf = CountingBloomFilter::with_target(
                config.store_capacity,
                config.target_fpr,
                DEFAULT_NUM_HASHES,
                mix64(config.seed ^ mix64(j as u64)),
            );
            Datastore::new(j, config.store_capacity, cbf, RhoEstimator::default())
        })
        .collect()
}

fn indicated_context(
    stores: &[Datastore],
    costs: &CostMatrix,
    client: usize,
    item: u64,
    beta: f64,
) -> Result<SelectionContext> {
    let candidates = stores
        .iter()
        .filter(|s| s.indicates(item))
        .map(|s| {
            let rho = s.estimator().estimate().unwrap_or(COLD_START_RHO);
            DatastoreProfile::new(
                s.id(),
                costs.get(client, s.id()) as f64,
                rho.clamp(0.0, RHO_MAX),
            )
        })
        .collect();
    SelectionContext::new(candidates, beta)
}

/// Runs one strategy over the workload. When `log` is given, every request
/// is appended to it.
pub fn simulate(
    config: &SimConfig,
    workload: &Workload,
    mut log: Option<&mut Vec<RequestRecord>>,
) -> Result<RunTotals> {
    let n = workload.topology.len();
    config.validate(n)?;
    let costs = workload.topology.cost_matrix(config.alpha, config.big_t)?;
    let ids: Vec<StoreId> = (0..n).collect();
    let mut stores = build_stores(config, n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let beta = config.miss_penalty;

    let mut access_cost = 0u64;
    let mut misses = 0u64;
    for (request, &item) in workload.trace.iter().enumerate() {
        let client = rng.random_range(0..n);
        let selected = match config.strategy {
            SimStrategy::Pi => pi_select(&costs, client, item, &stores),
            SimStrategy::Select(s) => indicated_context(&stores, &costs, client, item, beta)
                .and_then(|ctx| s.select(&ctx))
                .map_err(|e| DssError::Aborted {
                    request,
                    strategy: s.name().into(),
                    message: e.to_string(),
                })?,
        };

        let mut cost = 0u64;
        let mut hit = false;
        for &j in &selected {
            cost += costs.get(client, j) as u64;
            hit |= stores[j].access(item) == AccessOutcome::Hit;
        }
        access_cost += cost;
        if !hit {
            misses += 1;
            for j in designated_stores(item, config.locations_per_item, &ids) {
                // a designated store may hold the item without having been accessed
                if !stores[j].contains(item) {
                    stores[j].insert(item)?;
                }
            }
        }
        if let Some(log) = log.as_deref_mut() {
            log.push(RequestRecord {
                client,
                item,
                selected,
                access_cost: cost,
                hit,
            });
        }
    }
    Ok(RunTotals {
        requests: workload.trace.len() as u64,
        access_cost,
        misses,
        total_cost: access_cost as f64 + beta * misses as f64,
    })
}

pub const METRICS_HEADER: &str =
    "strategy,beta,k,S,fpr,alpha,seed,requests,AC,TC,misses,AC_norm,TC_norm";

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub strategy: SimStrategy,
    pub miss_penalty: f64,
    pub locations_per_item: usize,
    pub store_capacity: usize,
    pub target_fpr: f64,
    pub alpha: f64,
    pub seed: u64,
    pub requests: u64,
    pub access_cost: u64,
    pub total_cost: f64,
    pub misses: u64,
    pub ac_norm: f64,
    pub tc_norm: f64,
}

impl SimMetrics {
    /// Normalizes `totals` by the benchmark's total cost. An empty trace
    /// normalizes to 0.
    pub fn new(config: &SimConfig, totals: RunTotals, pi_total_cost: f64) -> Self {
        let norm = |x: f64| {
            if pi_total_cost > 0.0 {
                x / pi_total_cost
            } else {
                0.0
            }
        };
        Self {
            strategy: config.strategy,
            miss_penalty: config.miss_penalty,
            locations_per_item: config.locations_per_item,
            store_capacity: config.store_capacity,
            target_fpr: config.target_fpr,
            alpha: config.alpha,
            seed: config.seed,
            requests: totals.requests,
            access_cost: totals.access_cost,
            total_cost: totals.total_cost,
            misses: totals.misses,
            ac_norm: norm(totals.access_cost as f64),
            tc_norm: norm(totals.total_cost),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            sig6(self.miss_penalty),
            self.locations_per_item,
            self.store_capacity,
            sig6(self.target_fpr),
            sig6(self.alpha),
            self.seed,
            self.requests,
            sig6(self.access_cost as f64),
            sig6(self.total_cost),
            self.misses,
            sig6(self.ac_norm),
            sig6(self.tc_norm),
        )
    }
}

pub fn metrics_csv(rows: &[SimMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// One strategy plus its paired benchmark run.
pub fn run_with(config: &SimConfig, workload: &Workload) -> Result<SimMetrics> {
    let totals = simulate(config, workload, None)?;
    let pi_total = if config.strategy == SimStrategy::Pi {
        totals.total_cost
    } else {
        let pi = SimConfig {
            strategy: SimStrategy::Pi,
            ..config.clone()
        };
        simulate(&pi, workload, None)?.total_cost
    };
    Ok(SimMetrics::new(config, totals, pi_total))
}

pub fn run(config: &SimConfig) -> Result<SimMetrics> {
    run_with(config, &Workload::load(config)?)
}

/// Every strategy of one `(beta, k, seed)` cell, normalized by a single
/// benchmark run. Rows follow the order of `strategies`.
pub fn run_cell(
    base: &SimConfig,
    strategies: &[SimStrategy],
    workload: &Workload,
) -> Result<Vec<SimMetrics>> {
    let pi = SimConfig {
        strategy: SimStrategy::Pi,
        ..base.clone()
    };
    let pi_totals = simulate(&pi, workload, None)?;
    strategies
        .iter()
        .map(|&s| {
            let config = SimConfig {
                strategy: s,
                ..base.clone()
            };
            let totals = if s == SimStrategy::Pi {
                pi_totals
            } else {
                simulate(&config, workload, None)?
            };
            Ok(SimMetrics::new(&config, totals, pi_totals.total_cost))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Edge;

    fn small_topology() -> Topology {
        Topology::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Edge {
                    a: 0,
                    b: 1,
                    bw: 10.0,
                },
                Edge {
                    a: 1,
                    b: 2,
                    bw: 10.0,
                },
            ],
        )
        .unwrap()
    }

    fn config(strategy: SimStrategy, k: usize) -> SimConfig {
        SimConfig {
            strategy,
            locations_per_item: k,
            store_capacity: 50,
            seed: 4,
            ..SimConfig::default()
        }
    }

    #[test]
    fn repeated_item_hits_second_time() {
        let w = Workload {
            topology: small_topology(),
            trace: vec![7, 7],
        };
        let mut log = Vec::new();
        let c = config(SimStrategy::Select(Strategy::Cpi), 1);
        let t = simulate(&c, &w, Some(&mut log)).unwrap();
        assert!(!log[0].hit);
        assert!(log[1].hit);
        assert_eq!(log[1].selected, designated_stores(7, 1, &[0, 1, 2]));
        assert_eq!(t.misses, 1);
        assert_eq!(t.total_cost, t.access_cost as f64 + 100.0);
    }

    #[test]
    fn pi_normalizes_to_one() {
        let w = Workload {
            topology: small_topology(),
            trace: ZipfTrace {
                requests: 2000,
                items: 300,
                skew: 1.0,
            }
            .generate(1)
            .unwrap(),
        };
        let m = run_with(&config(SimStrategy::Pi, 2), &w).unwrap();
        assert_eq!(m.tc_norm, 1.0);
        assert!(m.ac_norm < 1.0);
    }

    #[test]
    fn pi_picks_cheapest_holder() {
        let topo = small_topology();
        let costs = topo.cost_matrix(0.5, None).unwrap();
        let c = config(SimStrategy::Pi, 1);
        let mut stores = build_stores(&c, 3);
        assert!(pi_select(&costs, 0, 5, &stores).is_empty());
        stores[2].insert(5).unwrap();
        assert_eq!(pi_select(&costs, 0, 5, &stores), vec![2]);
        stores[1].insert(5).unwrap();
        assert_eq!(pi_select(&costs, 0, 5, &stores), vec![1]);
        assert!(costs.get(0, 1) < costs.get(0, 2));
    }

    #[test]
    fn csv_shape() {
        let w = Workload {
            topology: small_topology(),
            trace: vec![1, 2, 1],
        };
        let rows = run_cell(&config(SimStrategy::Pi, 1), &SimStrategy::DEFAULT_BENCH, &w).unwrap();
        let csv = metrics_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], METRICS_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("pi,100,1,50,0.02,0.5,4,3,"));
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), 13);
        }
    }

    #[test]
    fn config_validation() {
        let c = |f: fn(&mut SimConfig)| {
            let mut c = SimConfig::default();
            f(&mut c);
            c.validate(19)
        };
        assert!(c(|_| ()).is_ok());
        assert!(c(|c| c.locations_per_item = 0).is_err());
        assert!(c(|c| c.locations_per_item = 20).is_err());
        assert!(c(|c| c.miss_penalty = 0.5).is_err());
        assert!(c(|c| c.target_fpr = 0.0).is_err());
        assert!(c(|c| c.alpha = 1.5).is_err());
    }

    #[test]
    fn strategy_names() {
        for s in SimStrategy::DEFAULT_BENCH {
            assert_eq!(s.name().parse::<SimStrategy>().unwrap(), s);
        }
        assert!("nope".parse::<SimStrategy>().is_err());
    }
}
