//! Point-of-presence topology and the client-to-store access cost matrix.
//!
//! Clients reach a store over a minimum-hop path; among those, the path
//! with the widest bottleneck wins. The cost from node `i` to node `j` is
//!
//! ```text
//! c(i, j) = ceil(1 + alpha * hops(i, j) + (1 - alpha) * T / bw(i, j))
//! ```
//!
//! with `bw(i, i) = inf`, so `c(i, i) = 1`.
//!
//! Topology files are TOML:
//!
//! ```toml
//! nodes = ["a", "b", "c"]
//!
//! [[edges]]
//! a = "a"
//! b = "b"
//! bw = 100.0
//! ```

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{DssError, Result};

/// Bundled 19-node stand-in for a real CDN backbone.
pub const SYNTHETIC_TOPOLOGY: &str = include_str!("../data/synthetic_pops.toml");
pub const SYNTHETIC_TOPOLOGY_SEED: u64 = 19;

/// Slack under which a cost a hair above an integer still rounds down.
const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub bw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    nodes: toml::Spanned<Vec<String>>,
    #[serde(default)]
    edges: Vec<toml::Spanned<EdgeSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    a: String,
    b: String,
    bw: f64,
}

pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Topology {
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(DssError::Topology("no nodes".into()));
        }
        let mut names = HashSet::new();
        for name in &nodes {
            if !names.insert(name) {
                return Err(DssError::Topology(format!("duplicate node '{name}'")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut pairs = HashSet::new();
        for e in &edges {
            Self::check_edge(&nodes, e, &mut pairs).map_err(DssError::Topology)?;
            adjacency[e.a].push((e.b, e.bw));
            adjacency[e.b].push((e.a, e.bw));
        }
        let topo = Self {
            nodes,
            edges,
            adjacency,
        };
        if let Some(lost) = topo.unreachable_from_first() {
            return Err(DssError::Topology(format!(
                "graph is not connected: '{}' is unreachable",
                topo.nodes[lost]
            )));
        }
        Ok(topo)
    }

    fn check_edge(
        nodes: &[String],
        e: &Edge,
        pairs: &mut HashSet<(usize, usize)>,
    ) -> std::result::Result<(), String> {
        if e.a >= nodes.len() || e.b >= nodes.len() {
            return Err(format!("edge ({}, {}) references a missing node", e.a, e.b));
        }
        if e.a == e.b {
            return Err(format!("self-loop on '{}'", nodes[e.a]));
        }
        if !(e.bw.is_finite() && e.bw > 0.0) {
            return Err(format!("bandwidth {} must be positive", e.bw));
        }
        if !pairs.insert((e.a.min(e.b), e.a.max(e.b))) {
            return Err(format!("duplicate edge '{}'-'{}'", nodes[e.a], nodes[e.b]));
        }
        Ok(())
    }

    fn unreachable_from_first(&self) -> Option<usize> {
        let hops = self.hops_from(0);
        hops.iter().position(|h| h.is_none())
    }

    /// Parses a topology document; `origin` names it in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| DssError::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let file: TopologyFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
            parse_err(line, e.message().to_string())
        })?;

        let nodes_line = line_of(text, file.nodes.span().start);
        let nodes = file.nodes.into_inner();
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != nodes.len() {
            return Err(parse_err(nodes_line, "duplicate node name".into()));
        }

        let mut edges = Vec::with_capacity(file.edges.len());
        let mut pairs = HashSet::new();
        for spanned in &file.edges {
            let line = line_of(text, spanned.span().start);
            let spec = spanned.get_ref();
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| parse_err(line, format!("unknown node '{name}'")))
            };
            let e = Edge {
                a: lookup(&spec.a)?,
                b: lookup(&spec.b)?,
                bw: spec.bw,
            };
            Self::check_edge(&nodes, &e, &mut pairs).map_err(|m| parse_err(line, m))?;
            edges.push(e);
        }
        Self::new(nodes, edges).map_err(|e| match e {
            DssError::Topology(m) => parse_err(nodes_line, m),
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DssError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// The bundled synthetic topology.
    pub fn synthetic() -> Self {
        Self::from_toml_str(SYNTHETIC_TOPOLOGY, "synthetic_pops.toml")
            .expect("bundled topology is valid")
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = String::from("nodes = [");
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "\"{n}\"").unwrap();
        }
        out.push_str("]\n");
        for e in &self.edges {
            write!(
                out,
                "\n[[edges]]\na = \"{}\"\nb = \"{}\"\nbw = {:?}\n",
                self.nodes[e.a], self.nodes[e.b], e.bw
            )
            .unwrap();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    fn hops_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut hops = vec![None; self.len()];
        hops[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let h = hops[v].unwrap();
            for &(u, _) in &self.adjacency[v] {
                if hops[u].is_none() {
                    hops[u] = Some(h + 1);
                    queue.push_back(u);
                }
            }
        }
        hops
    }

    /// Hop count and widest bottleneck over minimum-hop paths from `src` to
    /// every node. BFS fixes the layers; a pass in BFS order then carries
    /// the bottleneck only along edges that advance one layer.
    pub fn paths_from(&self, src: usize) -> Vec<(usize, f64)> {
        let hops = self.hops_from(src);
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| hops[v]);
        let mut width = vec![0.0f64; self.len()];
        width[src] = f64::INFINITY;
        for v in order {
            let hv = hops[v].expect("connected");
            for &(u, bw) in &self.adjacency[v] {
                if hops[u] == Some(hv + 1) {
                    width[u] = width[u].max(width[v].min(bw));
                }
            }
        }
        hops.into_iter()
            .map(|h| h.expect("connected"))
            .zip(width)
            .collect()
    }

    pub fn min_hop_max_bottleneck(&self, src: usize, dst: usize) -> Result<(usize, f64)> {
        if src >= self.len() || dst >= self.len() {
            return Err(DssError::Topology(format!(
                "no node with index {}",
                src.max(dst)
            )));
        }
        Ok(self.paths_from(src)[dst])
    }

    /// Largest bottleneck bandwidth between distinct nodes; the default `T`.
    pub fn max_pair_bandwidth(&self) -> f64 {
        (0..self.len())
            .flat_map(|i| {
                self.paths_from(i)
                    .into_iter()
                    .enumerate()
                    .filter(move |(j, _)| *j != i)
                    .map(|(_, (_, bw))| bw)
            })
            .fold(0.0, f64::max)
    }

    pub fn cost_matrix(&self, alpha: f64, big_t: Option<f64>) -> Result<CostMatrix> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(DssError::Config(format!(
                "alpha {alpha} must lie in [0, 1]"
            )));
        }
        let required = self.max_pair_bandwidth();
        let t = big_t.unwrap_or(required);
        if t < required {
            return Err(DssError::BandwidthScaleTooSmall { given: t, required });
        }
        let n = self.len();
        let mut costs = vec![0u32; n * n];
        for i in 0..n {
            for (j, (hops, bw)) in self.paths_from(i).into_iter().enumerate() {
                let raw = if i == j {
                    1.0
                } else {
                    1.0 + alpha * hops as f64 + (1.0 - alpha) * t / bw
                };
                costs[i * n + j] = (raw - CEIL_SLACK).ceil().max(1.0) as u32;
            }
        }
        Ok(CostMatrix { n, costs })
    }
}

/// Integral access costs, `cost(client, store)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    n: usize,
    costs: Vec<u32>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(DssError::Config("cost matrix must be square".into()));
        }
        let costs: Vec<u32> = rows.into_iter().flatten().collect();
        if costs.iter().any(|&c| c < 1) {
            return Err(DssError::Config("costs must be at least 1".into()));
        }
        Ok(Self { n, costs })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, client: usize, store: usize) -> u32 {
        self.costs[client * self.n + store]
    }

    pub fn values(&self) -> &[u32] {
        &self.costs
    }
}

/// Random geometric graph: nodes scattered in the unit square, joined when
/// close, plus a Euclidean spanning tree so the graph is connected. Link
/// bandwidths come from a tiered menu topping out at 500, and the widest
/// tier always appears at least once.
pub fn generate_geometric(n: usize, seed: u64) -> Topology {
    const RADIUS: f64 = 0.3;
    const TIERS: [f64; 6] = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0];
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let dist =
        |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    // Prim's tree
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    for _ in 1..n {
        let (a, b) = (0..n)
            .filter(|&a| in_tree[a])
            .flat_map(|a| (0..n).filter(|&b| !in_tree[b]).map(move |b| (a, b)))
            .min_by(|x, y| dist(x.0, x.1).total_cmp(&dist(y.0, y.1)))
            .unwrap();
        in_tree[b] = true;
        pairs.push((a.min(b), a.max(b)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if dist(a, b) < RADIUS && !pairs.contains(&(a, b)) {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();

    let mut edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(a, b)| Edge {
            a,
            b,
            bw: TIERS[rng.random_range(0..TIERS.len())],
        })
        .collect();
    if !edges.iter().any(|e| e.bw == 500.0) {
        let i = rng.random_range(0..edges.len());
        edges[i].bw = 500.0;
    }
    let nodes = (0..n).map(|i| format!("pop{i:02}")).collect();
    Topology::new(nodes, edges).expect("spanning tree keeps the graph connected")
}
