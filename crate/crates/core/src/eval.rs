//! Metrics comparing an inferred graph with the ground truth, plus a seeded
//! label-propagation detector used to extract communities.

use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cascade::NodeId;
use crate::error::{Error, Result};
use crate::graph::{Adjacency, CommunityPartition, Graph};
use crate::inference::InferredGraph;

/// Edge-level precision, recall and F-measure.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub true_edge_count: usize,
    pub inferred_edge_count: usize,
    pub hit_count: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Compares edge sets. Direction matters only when `truth` is directed.
pub fn edge_metrics(truth: &Graph, inferred: &InferredGraph) -> EdgeReport {
    let mut predicted: Vec<(NodeId, NodeId)> = inferred
        .edges
        .iter()
        .map(|e| {
            let (u, v) = (e.source, e.target);
            if truth.is_directed() || u < v {
                (u, v)
            } else {
                (v, u)
            }
        })
        .collect();
    predicted.sort_unstable();
    predicted.dedup();
    let hits = predicted
        .iter()
        .filter(|&&(u, v)| truth.has_edge(u, v))
        .count();
    let precision = ratio(hits, predicted.len());
    let recall = ratio(hits, truth.edge_count());
    EdgeReport {
        precision,
        recall,
        f_measure: harmonic(precision, recall),
        true_edge_count: truth.edge_count(),
        inferred_edge_count: predicted.len(),
        hit_count: hits,
    }
}

/// Node recovery and per-node relative errors of degree and clustering.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructureReport {
    pub node_recovery: f64,
    pub degree_rel_err: f64,
    pub clustering_rel_err: f64,
}

fn degree_of(adj: &Adjacency, u: NodeId) -> usize {
    if u.index() < adj.node_count() {
        adj.degree(u)
    } else {
        0
    }
}

fn local_clustering(adj: &Adjacency, u: NodeId) -> f64 {
    if u.index() >= adj.node_count() {
        return 0.0;
    }
    let nbrs = adj.neighbors(u);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in nbrs.iter().enumerate() {
        let na = adj.neighbors(a);
        links += nbrs[i + 1..]
            .iter()
            .filter(|b| na.binary_search(b).is_ok())
            .count();
    }
    links as f64 / (d * (d - 1) / 2) as f64
}

/// Local clustering coefficient of every node of the undirected projection.
pub fn clustering_coefficients(g: &Graph) -> Vec<f64> {
    let adj = g.undirected_adjacency();
    (0..g.node_count())
        .map(|u| local_clustering(&adj, NodeId(u as u32)))
        .collect()
}

/// Relative errors use `|x_true − x_inf| / max(x_true, 1)` averaged over the
/// truth graph's nodes; both graphs are projected to undirected form.
pub fn structure_metrics(truth: &Graph, inferred: &Graph) -> StructureReport {
    let ta = truth.undirected_adjacency();
    let ia = inferred.undirected_adjacency();
    let n = truth.node_count();
    let (mut active, mut recovered) = (0usize, 0usize);
    let (mut deg_err, mut cc_err) = (0.0, 0.0);
    for u in 0..n {
        let u = NodeId(u as u32);
        let (dt, di) = (degree_of(&ta, u), degree_of(&ia, u));
        if dt > 0 {
            active += 1;
            if di > 0 {
                recovered += 1;
            }
        }
        deg_err += (dt as f64 - di as f64).abs() / (dt as f64).max(1.0);
        let (ct, ci) = (local_clustering(&ta, u), local_clustering(&ia, u));
        cc_err += (ct - ci).abs() / ct.max(1.0);
    }
    let mean = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
    StructureReport {
        node_recovery: ratio(recovered, active),
        degree_rel_err: mean(deg_err),
        clustering_rel_err: mean(cc_err),
    }
}

/// NMI value together with a flag for the zero-entropy case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmiOutcome {
    pub value: f64,
    /// Both partitions had a single community (or no shared nodes), so the
    /// normaliser vanished.
    pub degenerate: bool,
}

/// Contingency counts over nodes assigned in both partitions.
struct Contingency {
    cells: HashMap<(u32, u32), usize>,
    rows: HashMap<u32, usize>,
    cols: HashMap<u32, usize>,
    total: usize,
}

fn contingency(a: &CommunityPartition, b: &CommunityPartition) -> Contingency {
    let mut c = Contingency {
        cells: HashMap::new(),
        rows: HashMap::new(),
        cols: HashMap::new(),
        total: 0,
    };
    for (x, y) in a.assignment().iter().zip(b.assignment()) {
        if let (Some(x), Some(y)) = (x, y) {
            *c.cells.entry((*x, *y)).or_insert(0) += 1;
            *c.rows.entry(*x).or_insert(0) += 1;
            *c.cols.entry(*y).or_insert(0) += 1;
            c.total += 1;
        }
    }
    c
}

/// Sum in sorted key order so results do not depend on hash iteration order.
fn sorted_sum<K: Ord + Copy>(m: &HashMap<K, usize>, f: impl Fn(K, usize) -> f64) -> f64 {
    let mut items: Vec<(K, usize)> = m.iter().map(|(&k, &v)| (k, v)).collect();
    items.sort_unstable_by_key(|&(k, _)| k);
    items.into_iter().map(|(k, v)| f(k, v)).sum()
}

pub fn nmi_detailed(a: &CommunityPartition, b: &CommunityPartition) -> NmiOutcome {
    let c = contingency(a, b);
    if c.total == 0 {
        return NmiOutcome {
            value: 0.0,
            degenerate: true,
        };
    }
    let n = c.total as f64;
    let numerator = -2.0
        * sorted_sum(&c.cells, |(i, j), nij| {
            let ni = c.rows[&i] as f64;
            let nj = c.cols[&j] as f64;
            let nij = nij as f64;
            nij * libm::log(nij * n / (ni * nj))
        });
    let denominator = sorted_sum(&c.rows, |_, ni| ni as f64 * libm::log(ni as f64 / n))
        + sorted_sum(&c.cols, |_, nj| nj as f64 * libm::log(nj as f64 / n));
    if denominator == 0.0 {
        // Both sides are a single community over the same nodes.
        return NmiOutcome {
            value: 1.0,
            degenerate: true,
        };
    }
    NmiOutcome {
        value: (numerator / denominator).clamp(0.0, 1.0),
        degenerate: false,
    }
}

/// Normalized mutual information over the nodes assigned in both partitions.
pub fn nmi(a: &CommunityPartition, b: &CommunityPartition) -> f64 {
    nmi_detailed(a, b).value
}

fn pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Pairwise F-measure: precision and recall of same-community node pairs of
/// `inferred` against `truth`. Returns 1 when neither side has any pair and
/// 0 when only one side is empty.
pub fn pwf(truth: &CommunityPartition, inferred: &CommunityPartition) -> f64 {
    let c = contingency(truth, inferred);
    let common: usize = c.cells.values().map(|&k| pairs(k)).sum();
    let h_truth: usize = c.rows.values().map(|&k| pairs(k)).sum();
    let h_inferred: usize = c.cols.values().map(|&k| pairs(k)).sum();
    if h_truth == 0 && h_inferred == 0 {
        return 1.0;
    }
    harmonic(ratio(common, h_inferred), ratio(common, h_truth))
}

/// Internal and boundary edge counts of one node set.
fn internal_and_boundary(members: &[NodeId], g: &Graph) -> (usize, usize) {
    let set: HashSet<NodeId> = members.iter().copied().collect();
    let und = g.to_undirected();
    let (mut internal, mut boundary) = (0, 0);
    for &(u, v) in und.edges() {
        match (set.contains(&u), set.contains(&v)) {
            (true, true) => internal += 1,
            (true, false) | (false, true) => boundary += 1,
            _ => {}
        }
    }
    (internal, boundary)
}

fn density_from(size: usize, internal: usize) -> f64 {
    if size < 2 {
        0.0
    } else {
        internal as f64 / pairs(size) as f64
    }
}

fn conductance_from(internal: usize, boundary: usize) -> f64 {
    let den = 2 * internal + boundary;
    if den == 0 {
        0.0
    } else {
        boundary as f64 / den as f64
    }
}

/// Internal edges over possible pairs; 0 for fewer than two nodes.
pub fn density(members: &[NodeId], g: &Graph) -> f64 {
    let (internal, _) = internal_and_boundary(members, g);
    density_from(members.len(), internal)
}

/// Boundary edges over `2 · internal + boundary`; 0 when both are zero.
pub fn conductance(members: &[NodeId], g: &Graph) -> f64 {
    let (internal, boundary) = internal_and_boundary(members, g);
    conductance_from(internal, boundary)
}

/// Average density and conductance over every community of `partition` in `g`.
pub fn average_community_profile(g: &Graph, partition: &CommunityPartition) -> (f64, f64) {
    let groups = partition.communities();
    if groups.is_empty() {
        return (0.0, 0.0);
    }
    let mut slot: HashMap<u32, usize> = HashMap::new();
    for (i, group) in groups.iter().enumerate() {
        if let Some(c) = partition.community_of(group[0]) {
            slot.insert(c, i);
        }
    }
    let mut internal = alloc::vec![0usize; groups.len()];
    let mut boundary = alloc::vec![0usize; groups.len()];
    let which = |u: NodeId| partition.community_of(u).map(|c| slot[&c]);
    for &(u, v) in g.to_undirected().edges() {
        match (which(u), which(v)) {
            (Some(a), Some(b)) if a == b => internal[a] += 1,
            (a, b) => {
                if let Some(a) = a {
                    boundary[a] += 1;
                }
                if let Some(b) = b {
                    boundary[b] += 1;
                }
            }
        }
    }
    let k = groups.len() as f64;
    let dens: f64 = groups
        .iter()
        .enumerate()
        .map(|(i, grp)| density_from(grp.len(), internal[i]))
        .sum();
    let cond: f64 = (0..groups.len())
        .map(|i| conductance_from(internal[i], boundary[i]))
        .sum();
    (dens / k, cond / k)
}

/// Relative error in the number of communities.
pub fn nc_from_counts(truth_count: usize, inferred_count: usize) -> Result<f64> {
    if truth_count == 0 {
        return Err(Error::NoCommunities);
    }
    Ok(truth_count.abs_diff(inferred_count) as f64 / truth_count as f64)
}

pub fn nc(truth: &CommunityPartition, inferred: &CommunityPartition) -> Result<f64> {
    nc_from_counts(truth.community_count(), inferred.community_count())
}

/// Round cap for [`label_propagation`].
pub const LABEL_PROPAGATION_ROUNDS: usize = 100;

/// Asynchronous label propagation on the undirected projection of `g`.
///
/// Each round visits nodes in a seeded random order; a node whose label is
/// not among the most frequent labels of its neighbours switches to the
/// smallest of those.
/// Stops after a round without changes or after
/// [`LABEL_PROPAGATION_ROUNDS`]. Communities are numbered in order of their
/// smallest member.
pub fn label_propagation(g: &Graph, rng_seed: u64) -> CommunityPartition {
    let n = g.node_count();
    let adj = g.undirected_adjacency();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut scratch: Vec<u32> = Vec::new();
    for _ in 0..LABEL_PROPAGATION_ROUNDS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &u in &order {
            let nbrs = adj.neighbors(NodeId(u));
            if nbrs.is_empty() {
                continue;
            }
            scratch.clear();
            scratch.extend(nbrs.iter().map(|v| labels[v.index()]));
            scratch.sort_unstable();
            let current = labels[u as usize];
            let (mut best, mut best_count, mut current_count) = (scratch[0], 0, 0);
            let mut i = 0;
            while i < scratch.len() {
                let label = scratch[i];
                let run = scratch[i..].iter().take_while(|&&x| x == label).count();
                if run > best_count {
                    best = label;
                    best_count = run;
                }
                if label == current {
                    current_count = run;
                }
                i += run;
            }
            if current_count < best_count {
                labels[u as usize] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut renumber: HashMap<u32, u32> = HashMap::new();
    let dense: Vec<u32> = labels
        .iter()
        .map(|&l| {
            let next = renumber.len() as u32;
            *renumber.entry(l).or_insert(next)
        })
        .collect();
    CommunityPartition::from_labels(&dense)
}

/// Community comparison between truth and inferred networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityReport {
    pub nmi: f64,
    pub nmi_degenerate: bool,
    pub pwf: f64,
    pub density_gap: f64,
    pub conductance_gap: f64,
    pub nc: f64,
    pub truth_communities: usize,
    pub inferred_communities: usize,
    /// Seed given to label propagation; `None` when the inferred partition
    /// was supplied.
    pub detector_seed: Option<u64>,
}

/// Where the inferred network's communities come from.
#[derive(Debug, Clone, Copy)]
pub enum InferredCommunities<'a> {
    Detect { seed: u64 },
    Given(&'a CommunityPartition),
}

pub fn community_report(
    truth_graph: &Graph,
    truth_partition: &CommunityPartition,
    inferred_graph: &Graph,
    communities: InferredCommunities<'_>,
) -> Result<CommunityReport> {
    let n = truth_graph.node_count().max(inferred_graph.node_count());
    let inferred_graph = inferred_graph.clone().with_node_count(n);
    let (inferred_partition, detector_seed) = match communities {
        InferredCommunities::Detect { seed } => (label_propagation(&inferred_graph, seed), Some(seed)),
        InferredCommunities::Given(p) => (p.clone(), None),
    };
    let nmi = nmi_detailed(truth_partition, &inferred_partition);
    let (truth_density, truth_conductance) = average_community_profile(truth_graph, truth_partition);
    let (inf_density, inf_conductance) =
        average_community_profile(&inferred_graph, &inferred_partition);
    Ok(CommunityReport {
        nmi: nmi.value,
        nmi_degenerate: nmi.degenerate,
        pwf: pwf(truth_partition, &inferred_partition),
        density_gap: (truth_density - inf_density).abs(),
        conductance_gap: (truth_conductance - inf_conductance).abs(),
        nc: nc(truth_partition, &inferred_partition)?,
        truth_communities: truth_partition.community_count(),
        inferred_communities: inferred_partition.community_count(),
        detector_seed,
    })
}
