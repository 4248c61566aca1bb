//! Edge scoring from cascade vectors and top-K edge selection.
//!
//! Every cascade vector is turned into a row-stochastic transition matrix
//! whose entries decay with the label gap and the number of nodes infected
//! before the target. The per-cascade matrices are summed and row-normalised
//! into `P_C`, each stored pair is weighted by an ordered co-participation
//! similarity, and the K largest products form the inferred edge set.
//!
//! Sums over cascades are carried out in 2^-96 fixed point with `i128`
//! accumulators. Integer addition is associative, so the result does not
//! depend on how cascades are split across worker threads, and scaling every
//! count by the same factor (e.g. duplicating the input) leaves every ratio
//! bit-identical.

use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cascade::{CascadeSet, CascadeVector, NodeId};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Cascades per accumulation chunk.
const CHUNK: usize = 256;
/// 2^96.
const FIXED_SCALE: f64 = 79_228_162_514_264_337_593_543_950_336.0;

/// Whether scores are ranked per ordered pair or per unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Directedness {
    #[default]
    Directed,
    /// Both directions merged by taking the larger score.
    Undirected,
}

impl Directedness {
    pub fn is_directed(self) -> bool {
        matches!(self, Directedness::Directed)
    }
}

/// Edge-scoring method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    /// Transition-matrix score weighted by co-participation similarity.
    #[default]
    Dani,
    /// Sum of inverse label gaps over all ordered pairs.
    Baseline,
}

/// Diffusion weight of a potential edge from the node labelled `earlier` to
/// the node labelled `later`: `1 / (later * (later - earlier))`.
pub fn diffusion_weight(earlier: u32, later: u32) -> Result<f64> {
    if earlier == 0 || earlier >= later {
        return Err(Error::LabelOrder { earlier, later });
    }
    Ok(weight(earlier, later))
}

#[inline]
fn weight(earlier: u32, later: u32) -> f64 {
    1.0 / (f64::from(later) * f64::from(later - earlier))
}

/// Calls `emit(u, v, p)` for every entry of the row-normalised transition
/// matrix of one cascade vector.
#[inline]
fn for_each_transition(cv: &CascadeVector, mut emit: impl FnMut(NodeId, NodeId, f64)) {
    let nodes = cv.nodes();
    for (i, &u) in nodes.iter().enumerate() {
        let lu = i as u32 + 1;
        let total: f64 = (i + 1..nodes.len())
            .map(|j| weight(lu, j as u32 + 1))
            .sum();
        if total == 0.0 {
            continue;
        }
        for (j, &v) in nodes.iter().enumerate().skip(i + 1) {
            emit(u, v, weight(lu, j as u32 + 1) / total);
        }
    }
}

#[inline]
fn for_each_inverse_gap(cv: &CascadeVector, mut emit: impl FnMut(NodeId, NodeId, f64)) {
    let nodes = cv.nodes();
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate().skip(i + 1) {
            emit(u, v, 1.0 / (j - i) as f64);
        }
    }
}

/// Row-stochastic sparse transition matrix. Rows with no entries stay empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransitionMatrix(SparseMatrix);

impl TransitionMatrix {
    pub fn as_sparse(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.dimension()
    }

    pub fn nnz(&self) -> usize {
        self.0.nnz()
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        self.0.get(u, v)
    }

    pub fn row(&self, u: NodeId) -> (&[NodeId], &[f64]) {
        self.0.row(u)
    }

    pub fn row_sum(&self, u: NodeId) -> f64 {
        self.0.row_sum(u)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.0.iter()
    }
}

/// Transition matrix of a single cascade vector over `dimension` nodes.
pub fn cascade_transition_matrix(cv: &CascadeVector, dimension: usize) -> TransitionMatrix {
    let mut triplets = Vec::with_capacity(cv.len() * cv.len().saturating_sub(1) / 2);
    for_each_transition(cv, |u, v, p| triplets.push((u, v, p)));
    triplets.sort_unstable_by_key(|&(u, v, _)| (u, v));
    TransitionMatrix(SparseMatrix::from_sorted_triplets(dimension, triplets))
}

#[inline]
fn pair_key(u: NodeId, v: NodeId) -> u64 {
    (u64::from(u.0) << 32) | u64::from(v.0)
}

#[inline]
fn unpack(key: u64) -> (NodeId, NodeId) {
    (NodeId((key >> 32) as u32), NodeId(key as u32))
}

/// Fixed-point sum of a pair's values together with the number of cascades
/// that contributed to it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PairSum {
    fixed: i128,
    count: u32,
}

impl PairSum {
    #[inline]
    fn add(&mut self, other: PairSum) {
        self.fixed += other.fixed;
        self.count += other.count;
    }
}

type FixedSums = HashMap<u64, PairSum>;

fn accumulate_chunk<F>(chunk: &[CascadeVector], per_cascade: &F) -> FixedSums
where
    F: Fn(&CascadeVector, &mut dyn FnMut(NodeId, NodeId, f64)),
{
    let mut sums = FixedSums::new();
    for cv in chunk {
        per_cascade(cv, &mut |u, v, x| {
            sums.entry(pair_key(u, v)).or_default().add(PairSum {
                fixed: (x * FIXED_SCALE) as i128,
                count: 1,
            });
        });
    }
    sums
}

fn merge_sums(mut a: FixedSums, mut b: FixedSums) -> FixedSums {
    if a.len() < b.len() {
        core::mem::swap(&mut a, &mut b);
    }
    for (k, x) in b {
        a.entry(k).or_default().add(x);
    }
    a
}

/// Exact entrywise sum over all cascades, sorted by pair key.
fn accumulate<F>(cvs: &[CascadeVector], per_cascade: F) -> Vec<(u64, PairSum)>
where
    F: Fn(&CascadeVector, &mut dyn FnMut(NodeId, NodeId, f64)) + Sync,
{
    #[cfg(feature = "parallel")]
    let sums = cvs
        .par_chunks(CHUNK)
        .map(|chunk| accumulate_chunk(chunk, &per_cascade))
        .reduce(FixedSums::new, merge_sums);
    #[cfg(not(feature = "parallel"))]
    let sums = cvs
        .chunks(CHUNK)
        .map(|chunk| accumulate_chunk(chunk, &per_cascade))
        .fold(FixedSums::new(), merge_sums);

    let mut out: Vec<(u64, PairSum)> = sums.into_iter().collect();
    out.sort_unstable_by_key(|&(k, _)| k);
    out
}

fn row_totals(sums: &[(u64, PairSum)], dimension: usize) -> Vec<i128> {
    let mut totals: Vec<i128> = alloc::vec![0; dimension];
    for &(key, x) in sums {
        totals[unpack(key).0.index()] += x.fixed;
    }
    totals
}

/// `P_C`: the row-normalised sum of every cascade's transition matrix.
pub fn aggregate_transitions(cvs: &[CascadeVector], dimension: usize) -> TransitionMatrix {
    let sums = accumulate(cvs, |cv, emit| for_each_transition(cv, emit));
    let totals = row_totals(&sums, dimension);
    let triplets = sums.into_iter().map(|(key, x)| {
        let (u, v) = unpack(key);
        (u, v, x.fixed as f64 / totals[u.index()] as f64)
    });
    TransitionMatrix(SparseMatrix::from_sorted_triplets(dimension, triplets))
}

/// For every node, the cascades it was infected in and its label there.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticipationIndex {
    offsets: Vec<usize>,
    /// `(cascade index, label)`, ascending by cascade within each node.
    entries: Vec<(u32, u32)>,
    cascade_count: usize,
}

impl ParticipationIndex {
    pub fn dimension(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn cascade_count(&self) -> usize {
        self.cascade_count
    }

    /// `(cascade index, label)` for each cascade `u` participated in.
    pub fn participations(&self, u: NodeId) -> &[(u32, u32)] {
        if u.index() >= self.dimension() {
            return &[];
        }
        &self.entries[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    /// `In(u)`: indices of the cascades containing `u`.
    pub fn cascades_of(&self, u: NodeId) -> impl Iterator<Item = usize> + '_ {
        self.participations(u).iter().map(|&(c, _)| c as usize)
    }

    pub fn label(&self, cascade: usize, u: NodeId) -> Option<u32> {
        let p = self.participations(u);
        p.binary_search_by_key(&(cascade as u32), |&(c, _)| c)
            .ok()
            .map(|i| p[i].1)
    }

    /// Ordered co-participation similarity: cascades where `u` is infected
    /// before `v`, divided by cascades containing either node.
    pub fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        let a = self.participations(u);
        let b = self.participations(v);
        let (mut i, mut j) = (0, 0);
        let (mut shared, mut ordered) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    shared += 1;
                    if a[i].1 < b[j].1 {
                        ordered += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = a.len() + b.len() - shared;
        if union == 0 {
            0.0
        } else {
            ordered as f64 / union as f64
        }
    }
}

pub fn build_participation_index(cvs: &[CascadeVector], dimension: usize) -> ParticipationIndex {
    let mut offsets = alloc::vec![0usize; dimension + 1];
    for cv in cvs {
        for &n in cv.nodes() {
            offsets[n.index() + 1] += 1;
        }
    }
    for i in 0..dimension {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut entries = alloc::vec![(0u32, 0u32); offsets[dimension]];
    for (c, cv) in cvs.iter().enumerate() {
        for (n, label) in cv.entries() {
            entries[cursor[n.index()]] = (c as u32, label);
            cursor[n.index()] += 1;
        }
    }
    ParticipationIndex {
        offsets,
        entries,
        cascade_count: cvs.len(),
    }
}

/// Free-function form of [`ParticipationIndex::similarity`].
pub fn similarity(u: NodeId, v: NodeId, idx: &ParticipationIndex) -> f64 {
    idx.similarity(u, v)
}

/// Sparse matrix of combined edge scores. Only positive scores are stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreMatrix(SparseMatrix);

impl ScoreMatrix {
    pub fn as_sparse(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.dimension()
    }

    pub fn nnz(&self) -> usize {
        self.0.nnz()
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        self.0.get(u, v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.0.iter()
    }
}

/// `α(u,v) = P_C(u,v) · ψ(u,v)` for every stored entry of `p_c`.
pub fn score_edges(p_c: &TransitionMatrix, idx: &ParticipationIndex) -> ScoreMatrix {
    let dimension = p_c.dimension();
    let score_row = |u: usize| -> Vec<(NodeId, f64)> {
        let u = NodeId(u as u32);
        let (cols, vals) = p_c.row(u);
        cols.iter()
            .zip(vals)
            .filter_map(|(&v, &p)| {
                let alpha = p * idx.similarity(u, v);
                (alpha > 0.0).then_some((v, alpha))
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = (0..dimension).into_par_iter().map(score_row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = (0..dimension).map(score_row).collect();
    ScoreMatrix(SparseMatrix::from_rows(dimension, rows))
}

/// Time-adjacency baseline: `Σ 1 / (label(v) − label(u))` over every cascade
/// in which `u` precedes `v`.
pub fn baseline_scores(cvs: &[CascadeVector], dimension: usize) -> ScoreMatrix {
    let sums = accumulate(cvs, |cv, emit| for_each_inverse_gap(cv, emit));
    let triplets = sums.into_iter().map(|(key, x)| {
        let (u, v) = unpack(key);
        (u, v, x.fixed as f64 / FIXED_SCALE)
    });
    ScoreMatrix(SparseMatrix::from_sorted_triplets(dimension, triplets))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub score: f64,
}

/// Ranked output of top-K selection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InferredGraph {
    /// Sorted by `(score desc, source asc, target asc)`.
    pub edges: Vec<ScoredEdge>,
    pub directedness: Directedness,
    pub requested_k: usize,
    /// Set when fewer than `requested_k` positive-score pairs existed.
    pub saturated: bool,
    pub dimension: usize,
}

fn rank_order(a: &ScoredEdge, b: &ScoredEdge) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.source.cmp(&b.source))
        .then(a.target.cmp(&b.target))
}

/// Keeps the `k` highest-scoring pairs. In undirected mode the two directions
/// of a pair are merged by their maximum and reported as `(min, max)`.
pub fn top_k(a: &ScoreMatrix, k: usize, directedness: Directedness) -> InferredGraph {
    let mut candidates: Vec<ScoredEdge> = match directedness {
        Directedness::Directed => a
            .iter()
            .filter(|&(_, _, s)| s > 0.0)
            .map(|(source, target, score)| ScoredEdge {
                source,
                target,
                score,
            })
            .collect(),
        Directedness::Undirected => {
            let mut merged: HashMap<u64, f64> = HashMap::with_capacity(a.nnz());
            for (u, v, s) in a.iter().filter(|&(_, _, s)| s > 0.0) {
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                let slot = merged.entry(pair_key(lo, hi)).or_insert(s);
                if s > *slot {
                    *slot = s;
                }
            }
            merged
                .into_iter()
                .map(|(key, score)| {
                    let (source, target) = unpack(key);
                    ScoredEdge {
                        source,
                        target,
                        score,
                    }
                })
                .collect()
        }
    };

    let saturated = k > candidates.len();
    if !saturated && k > 0 && k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, rank_order);
    }
    candidates.truncate(k);
    candidates.sort_unstable_by(rank_order);
    InferredGraph {
        edges: candidates,
        directedness,
        requested_k: k,
        saturated,
        dimension: a.dimension(),
    }
}

/// Full inference: transition matrices, similarity weighting, top-K.
pub fn infer(cs: &CascadeSet, k: usize, directedness: Directedness) -> InferredGraph {
    top_k(&dani_scores(cs), k, directedness)
}

/// Combined score matrix for a cascade set.
///
/// Equivalent to [`score_edges`] over [`aggregate_transitions`] and
/// [`build_participation_index`], but takes the similarity counts from the
/// same pass that sums the transition matrices: every ordered pair `(u, v)`
/// is emitted once per cascade in which `u` precedes `v`, and since labels
/// are distinct, `|In(u) ∩ In(v)|` is the sum of both orders.
pub fn dani_scores(cs: &CascadeSet) -> ScoreMatrix {
    let cvs = cs.vectors();
    let dimension = cs.dimension();
    let sums = accumulate(&cvs, |cv, emit| for_each_transition(cv, emit));
    let totals = row_totals(&sums, dimension);
    let mut participation = alloc::vec![0usize; dimension];
    for cv in &cvs {
        for &n in cv.nodes() {
            participation[n.index()] += 1;
        }
    }
    let reverse_count = |u: NodeId, v: NodeId| -> usize {
        sums.binary_search_by_key(&pair_key(v, u), |&(k, _)| k)
            .map_or(0, |i| sums[i].1.count as usize)
    };
    let score = |&(key, x): &(u64, PairSum)| -> Option<(NodeId, NodeId, f64)> {
        let (u, v) = unpack(key);
        let p = x.fixed as f64 / totals[u.index()] as f64;
        let ordered = x.count as usize;
        let union = participation[u.index()] + participation[v.index()] - ordered - reverse_count(u, v);
        let alpha = p * (ordered as f64 / union as f64);
        (alpha > 0.0).then_some((u, v, alpha))
    };
    #[cfg(feature = "parallel")]
    let triplets: Vec<_> = sums.par_iter().filter_map(score).collect();
    #[cfg(not(feature = "parallel"))]
    let triplets: Vec<_> = sums.iter().filter_map(score).collect();
    ScoreMatrix(SparseMatrix::from_sorted_triplets(dimension, triplets))
}

pub fn baseline_time_adjacency(
    cs: &CascadeSet,
    k: usize,
    directedness: Directedness,
) -> InferredGraph {
    top_k(
        &baseline_scores(&cs.vectors(), cs.dimension()),
        k,
        directedness,
    )
}

/// Dispatches to [`infer`] or [`baseline_time_adjacency`].
pub fn run(algorithm: Algorithm, cs: &CascadeSet, k: usize, directedness: Directedness) -> InferredGraph {
    match algorithm {
        Algorithm::Dani => infer(cs, k, directedness),
        Algorithm::Baseline => baseline_time_adjacency(cs, k, directedness),
    }
}
