//! Ground-truth graphs, community partitions and a planted-partition
//! generator with a configurable mixing parameter.

use alloc::string::ToString;
use alloc::vec::Vec;
use alloc::{format, vec};

use hashbrown::HashSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cascade::NodeId;
use crate::error::{Error, Result};
use crate::inference::InferredGraph;

/// Simple graph over nodes `0..n`. Undirected edges are stored as `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    directed: bool,
}

impl Graph {
    /// Rejects self-loops and out-of-range endpoints; repeated edges are merged.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        directed: bool,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u.index() >= n || v.index() >= n {
                return Err(Error::NodeOutOfRange(u, v));
            }
            out.push(if directed || u < v { (u, v) } else { (v, u) });
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self {
            n,
            edges: out,
            directed,
        })
    }

    /// Graph made of an inferred edge list over `n` nodes.
    pub fn from_inferred(inferred: &InferredGraph, n: usize) -> Result<Self> {
        let n = n.max(inferred.dimension);
        Graph::new(
            n,
            inferred.edges.iter().map(|e| (e.source, e.target)),
            inferred.directedness.is_directed(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).is_ok()
    }

    /// Undirected projection; a no-op for undirected graphs.
    pub fn to_undirected(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        Graph::new(self.n, self.edges.iter().copied(), false)
            .unwrap_or_else(|_| unreachable!("edges were validated on construction"))
    }

    /// Same graph over a larger node range.
    pub fn with_node_count(mut self, n: usize) -> Self {
        self.n = self.n.max(n);
        self
    }

    /// Undirected projection as adjacency lists (sorted, no repeats).
    pub fn undirected_adjacency(&self) -> Adjacency {
        let pairs = self.edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]);
        Adjacency::build(self.n, pairs)
    }

    /// Out-neighbours for directed graphs, all neighbours otherwise.
    pub fn out_adjacency(&self) -> Adjacency {
        if self.directed {
            Adjacency::build(self.n, self.edges.iter().copied())
        } else {
            self.undirected_adjacency()
        }
    }

    /// Number of weakly connected components.
    pub fn component_count(&self) -> usize {
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(NodeId(start as u32));
            while let Some(u) = stack.pop() {
                for &v in adj.neighbors(u) {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

/// Compressed adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Adjacency {
    fn build(n: usize, pairs: impl Iterator<Item = (NodeId, NodeId)> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for (u, _) in pairs.clone() {
            offsets[u.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![NodeId(0); offsets[n]];
        for (u, v) in pairs {
            targets[cursor[u.index()]] = v;
            cursor[u.index()] += 1;
        }
        for i in 0..n {
            let row = &mut targets[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
        }
        Self { offsets, targets }
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u.index() + 1] - self.offsets[u.index()]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Node to community assignment. Unassigned nodes are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommunityPartition {
    assignment: Vec<Option<u32>>,
    overlapping: bool,
}

impl CommunityPartition {
    /// Every node `i` belongs to `labels[i]`.
    pub fn from_labels(labels: &[u32]) -> Self {
        Self {
            assignment: labels.iter().map(|&c| Some(c)).collect(),
            overlapping: false,
        }
    }

    /// Builds from `(node, community)` pairs; a node listed twice is an error.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (NodeId, u32)>) -> Result<Self> {
        let mut assignment = vec![None; n];
        for (node, community) in pairs {
            if node.index() >= assignment.len() {
                assignment.resize(node.index() + 1, None);
            }
            if assignment[node.index()].replace(community).is_some() {
                return Err(Error::DuplicateAssignment(node));
            }
        }
        Ok(Self {
            assignment,
            overlapping: false,
        })
    }

    /// Each node in its own community.
    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n as u32).collect::<Vec<_>>())
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_overlapping(&self) -> bool {
        self.overlapping
    }

    pub fn community_of(&self, u: NodeId) -> Option<u32> {
        self.assignment.get(u.index()).copied().flatten()
    }

    pub fn assignment(&self) -> &[Option<u32>] {
        &self.assignment
    }

    /// Member lists, ordered by community label.
    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let mut labels: Vec<u32> = self.assignment.iter().flatten().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        let mut groups = vec![Vec::new(); labels.len()];
        for (i, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                let slot = labels.binary_search(c).unwrap_or_else(|_| unreachable!());
                groups[slot].push(NodeId(i as u32));
            }
        }
        groups
    }

    pub fn community_count(&self) -> usize {
        let mut labels: Vec<u32> = self.assignment.iter().flatten().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }
}

/// How community sizes are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum CommunitySizes {
    /// Explicit sizes summing to `n`.
    Fixed(Vec<usize>),
    /// Truncated power law between `min` and `max` with the given (positive)
    /// exponent.
    PowerLaw { min: usize, max: usize, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub communities: CommunitySizes,
    /// Fraction of each node's edges that leave its community.
    pub mu: f64,
    pub avg_degree: f64,
    pub max_degree: usize,
    /// Exponent of the truncated power-law degree distribution.
    pub degree_exponent: f64,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            communities: CommunitySizes::PowerLaw {
                min: 20,
                max: 50,
                exponent: 1.0,
            },
            mu: 0.1,
            avg_degree: 15.0,
            max_degree: 50,
            degree_exponent: 2.0,
            rng_seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n < 2 {
            return bad("n must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad("mu must lie in [0, 1]");
        }
        if self.avg_degree.is_nan() || self.avg_degree <= 0.0 {
            return bad("avg_degree must be positive");
        }
        if self.max_degree == 0 || self.max_degree >= self.n {
            return bad("max_degree must be in 1..n");
        }
        if self.avg_degree > self.max_degree as f64 {
            return bad("avg_degree exceeds max_degree");
        }
        if self.degree_exponent.is_nan() || self.degree_exponent < 0.0 {
            return bad("degree_exponent must be non-negative");
        }
        match &self.communities {
            CommunitySizes::Fixed(sizes) => {
                if sizes.iter().sum::<usize>() != self.n {
                    return bad("community sizes must sum to n");
                }
                if sizes.contains(&0) {
                    return bad("community sizes must be positive");
                }
            }
            CommunitySizes::PowerLaw { min, max, exponent } => {
                if *min == 0 || min > max || *max > self.n {
                    return bad("community size bounds must satisfy 1 <= min <= max <= n");
                }
                if exponent.is_nan() || *exponent < 0.0 {
                    return bad("community size exponent must be non-negative");
                }
            }
        }
        Ok(())
    }
}

/// `∫ x^a dx` over `[lo, hi]`.
fn power_integral(a: f64, lo: f64, hi: f64) -> f64 {
    if (a + 1.0).abs() < 1e-12 {
        libm::log(hi / lo)
    } else {
        (libm::pow(hi, a + 1.0) - libm::pow(lo, a + 1.0)) / (a + 1.0)
    }
}

/// Mean of the continuous density `∝ x^-t` on `[lo, hi]`.
fn power_law_mean(t: f64, lo: f64, hi: f64) -> f64 {
    power_integral(1.0 - t, lo, hi) / power_integral(-t, lo, hi)
}

/// Inverse-CDF draw from the density `∝ x^-t` on `[lo, hi]`.
fn power_law_draw(t: f64, lo: f64, hi: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    if (t - 1.0).abs() < 1e-12 {
        lo * libm::pow(hi / lo, u)
    } else {
        let a = 1.0 - t;
        let (l, h) = (libm::pow(lo, a), libm::pow(hi, a));
        libm::pow(l + u * (h - l), 1.0 / a)
    }
}

/// Lower cutoff so that the truncated power law on `[lo, hi]` has mean `target`.
fn power_law_lower_bound(t: f64, target: f64, hi: f64) -> f64 {
    let (mut lo, mut up) = (1.0, hi);
    if power_law_mean(t, lo, hi) >= target {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if power_law_mean(t, mid, hi) < target {
            lo = mid;
        } else {
            up = mid;
        }
    }
    0.5 * (lo + up)
}

fn sample_degrees(cfg: &GenConfig, rng: &mut impl Rng) -> Vec<usize> {
    let max = cfg.max_degree as f64;
    if cfg.avg_degree >= max {
        return vec![cfg.max_degree; cfg.n];
    }
    let lo = power_law_lower_bound(cfg.degree_exponent, cfg.avg_degree, max);
    (0..cfg.n)
        .map(|_| {
            let k = libm::round(power_law_draw(cfg.degree_exponent, lo, max, rng)) as usize;
            k.clamp(1, cfg.max_degree)
        })
        .collect()
}

fn sample_community_sizes(cfg: &GenConfig, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let (min, max, exponent) = match &cfg.communities {
        CommunitySizes::Fixed(sizes) => return Ok(sizes.clone()),
        CommunitySizes::PowerLaw { min, max, exponent } => (*min, *max, *exponent),
    };
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < cfg.n {
        let s = if min == max {
            min
        } else {
            let hi = max as f64 + 0.5;
            let lo = min as f64 - 0.5;
            (libm::round(power_law_draw(exponent, lo.max(0.5), hi, rng)) as usize).clamp(min, max)
        };
        sizes.push(s);
        total += s;
    }
    // Trim the overshoot from communities that can still shrink.
    let mut excess = total - cfg.n;
    while excess > 0 {
        let shrinkable: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] > min).collect();
        if shrinkable.is_empty() {
            // Drop a whole community and give its surplus back.
            let last = sizes.pop().ok_or_else(|| {
                Error::Infeasible("cannot split n into communities within size bounds".to_string())
            })?;
            if last > excess {
                return Err(Error::Infeasible(format!(
                    "cannot split n = {} into communities of size {min}..={max}",
                    cfg.n
                )));
            }
            excess -= last;
            continue;
        }
        let i = shrinkable[rng.random_range(0..shrinkable.len())];
        sizes[i] -= 1;
        excess -= 1;
    }
    Ok(sizes)
}

/// Pairs stubs at random over several reshuffling rounds. A pair is kept
/// when `accept` allows it and it is not already an edge. Unmatched stubs are
/// dropped.
fn match_stubs(
    mut stubs: Vec<NodeId>,
    rng: &mut impl Rng,
    accept: impl Fn(NodeId, NodeId) -> bool,
    edges: &mut HashSet<(NodeId, NodeId)>,
) {
    const ROUNDS: usize = 64;
    for _ in 0..ROUNDS {
        if stubs.len() < 2 {
            break;
        }
        stubs.shuffle(rng);
        let mut rest = Vec::new();
        let mut chunks = stubs.chunks_exact(2);
        for pair in &mut chunks {
            let (u, v) = (pair[0], pair[1]);
            let key = if u < v { (u, v) } else { (v, u) };
            if u != v && accept(u, v) && !edges.contains(&key) {
                edges.insert(key);
            } else {
                rest.extend_from_slice(pair);
            }
        }
        rest.extend_from_slice(chunks.remainder());
        stubs = rest;
    }
}

/// Undirected community-structured graph: heterogeneous degrees, each node's
/// edges split into an internal share `1 − mu` and an external share `mu`.
pub fn planted_partition(cfg: &GenConfig) -> Result<(Graph, CommunityPartition)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let degrees = sample_degrees(cfg, &mut rng);
    let internal: Vec<usize> = degrees
        .iter()
        .map(|&k| libm::round((1.0 - cfg.mu) * k as f64) as usize)
        .collect();
    let sizes = sample_community_sizes(cfg, &mut rng)?;

    // Largest internal degrees first, each into a random community that
    // still has room and is large enough to host it.
    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.shuffle(&mut rng);
    order.sort_by(|&a, &b| internal[b].cmp(&internal[a]));
    let mut free = sizes.clone();
    let mut labels = vec![0u32; cfg.n];
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); sizes.len()];
    for &node in &order {
        let fits: Vec<usize> = (0..sizes.len())
            .filter(|&c| free[c] > 0 && sizes[c] > internal[node])
            .collect();
        if fits.is_empty() {
            return Err(Error::Infeasible(format!(
                "no community can host a node with internal degree {}",
                internal[node]
            )));
        }
        let c = fits[rng.random_range(0..fits.len())];
        free[c] -= 1;
        labels[node] = c as u32;
        members[c].push(NodeId(node as u32));
    }

    let mut edges = HashSet::new();
    for group in &members {
        let stubs = group
            .iter()
            .flat_map(|&u| core::iter::repeat_n(u, internal[u.index()]))
            .collect();
        match_stubs(stubs, &mut rng, |_, _| true, &mut edges);
    }
    let external_stubs = (0..cfg.n)
        .flat_map(|u| core::iter::repeat_n(NodeId(u as u32), degrees[u] - internal[u]))
        .collect();
    match_stubs(
        external_stubs,
        &mut rng,
        |u, v| labels[u.index()] != labels[v.index()],
        &mut edges,
    );

    let mut edge_list: Vec<_> = edges.into_iter().collect();
    edge_list.sort_unstable();
    let graph = Graph::new(cfg.n, edge_list, false)?;
    Ok((graph, CommunityPartition::from_labels(&labels)))
}

/// Mean over nodes with at least one edge of the fraction of their edges
/// that leave their community.
pub fn realized_mixing(g: &Graph, partition: &CommunityPartition) -> f64 {
    let adj = g.undirected_adjacency();
    let (mut total, mut counted) = (0.0, 0usize);
    for u in 0..g.node_count() {
        let u = NodeId(u as u32);
        let deg = adj.degree(u);
        if deg == 0 {
            continue;
        }
        let own = partition.community_of(u);
        let outside = adj
            .neighbors(u)
            .iter()
            .filter(|&&v| partition.community_of(v) != own)
            .count();
        total += outside as f64 / deg as f64;
        counted += 1;
    }
    if counted == 0 {
        0.0
    } else {
        total / counted as f64
    }
}
