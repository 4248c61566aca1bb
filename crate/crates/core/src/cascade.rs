//! Cascade observations and the infection-label transform.
//!
//! A [`Cascade`] is the raw trace of one contagion: `(node, infection time)`
//! pairs in any order. Inference only looks at the order in which nodes were
//! infected, so every cascade is rewritten into a [`CascadeVector`] whose
//! entries carry their 1-based rank instead of a time.

use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Dense node index in `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Bidirectional map between external node identifiers (as they appear in
/// files) and dense [`NodeId`]s.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    external: Vec<u64>,
    lookup: HashMap<u64, NodeId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identity map over `0..n`.
    pub fn identity(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n as u64 {
            map.intern(i);
        }
        map
    }

    /// Returns the dense id for `external`, assigning the next free one if unseen.
    pub fn intern(&mut self, external: u64) -> NodeId {
        if let Some(&id) = self.lookup.get(&external) {
            return id;
        }
        let id = NodeId(self.external.len() as u32);
        self.external.push(external);
        self.lookup.insert(external, id);
        id
    }

    pub fn get(&self, external: u64) -> Option<NodeId> {
        self.lookup.get(&external).copied()
    }

    pub fn external(&self, id: NodeId) -> u64 {
        self.external[id.index()]
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }
}

/// One observed contagion: `(node, time)` pairs. Infinite time means the node
/// was never infected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cascade {
    entries: Vec<(NodeId, f64)>,
}

impl Cascade {
    /// Validates that no node repeats and every time is non-negative (or `+inf`).
    pub fn new(entries: Vec<(NodeId, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(node, time) in &entries {
            if time.is_nan() || time < 0.0 {
                return Err(Error::InvalidTime { node, time });
            }
            if !seen.insert(node) {
                return Err(Error::DuplicateNode(node));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    /// Entries with a finite infection time.
    pub fn infected(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().copied().filter(|(_, t)| t.is_finite())
    }

    /// Number of finite-time participants.
    pub fn len(&self) -> usize {
        self.infected().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorts finite entries by `(time, node)` and labels them `1..=n` by
    /// position. Never-infected entries are dropped.
    pub fn to_vector(&self) -> CascadeVector {
        let mut finite: Vec<(NodeId, f64)> = self.infected().collect();
        finite.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        CascadeVector {
            nodes: finite.into_iter().map(|(n, _)| n).collect(),
        }
    }
}

/// Free-function form of [`Cascade::to_vector`].
pub fn to_cascade_vector(c: &Cascade) -> CascadeVector {
    c.to_vector()
}

/// A cascade in infection-label form. The node at position `i` has label `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CascadeVector {
    nodes: Vec<NodeId>,
}

impl CascadeVector {
    /// Builds a vector from nodes already in infection order.
    pub fn from_ordered(nodes: Vec<NodeId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(nodes.len());
        for &n in &nodes {
            if !seen.insert(n) {
                return Err(Error::DuplicateNode(n));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// `(node, label)` pairs in ascending label order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i as u32 + 1))
    }

    pub fn label_of(&self, node: NodeId) -> Option<u32> {
        self.nodes
            .iter()
            .position(|&n| n == node)
            .map(|p| p as u32 + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cascade whose times equal the labels.
    pub fn to_cascade(&self) -> Cascade {
        Cascade {
            entries: self.entries().map(|(n, l)| (n, f64::from(l))).collect(),
        }
    }
}

/// A set of cascades over a shared node id space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CascadeSet {
    cascades: Vec<Cascade>,
    universe: Vec<NodeId>,
    ids: IdMap,
}

impl CascadeSet {
    /// `ids` must cover every node referenced by `cascades`; nodes known to
    /// `ids` but never infected do not enter the universe.
    pub fn new(cascades: Vec<Cascade>, ids: IdMap) -> Self {
        let mut mark = alloc::vec![false; ids.len()];
        for c in &cascades {
            for (n, _) in c.infected() {
                if n.index() >= mark.len() {
                    mark.resize(n.index() + 1, false);
                }
                mark[n.index()] = true;
            }
        }
        let universe = mark
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| NodeId(i as u32))
            .collect();
        Self {
            cascades,
            universe,
            ids,
        }
    }

    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    /// Sorted finite-time participants over all cascades.
    pub fn node_universe(&self) -> &[NodeId] {
        &self.universe
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    /// Dimension of the node id space.
    pub fn dimension(&self) -> usize {
        let max_used = self.universe.last().map_or(0, |n| n.index() + 1);
        self.ids.len().max(max_used)
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    pub fn vectors(&self) -> Vec<CascadeVector> {
        self.cascades.iter().map(Cascade::to_vector).collect()
    }

    /// First `count` cascades, sharing this set's id map.
    pub fn prefix(&self, count: usize) -> CascadeSet {
        let n = count.min(self.cascades.len());
        CascadeSet::new(self.cascades[..n].to_vec(), self.ids.clone())
    }
}

/// Summary counts for a cascade set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CascadeStats {
    pub count: usize,
    pub mean_length: f64,
    pub max_length: usize,
    pub node_count: usize,
}

pub fn cascade_stats(cs: &CascadeSet) -> CascadeStats {
    let lengths = cs.cascades().iter().map(Cascade::len);
    let (total, max_length) = lengths.fold((0usize, 0usize), |(s, m), l| (s + l, m.max(l)));
    let count = cs.len();
    CascadeStats {
        count,
        mean_length: if count == 0 {
            0.0
        } else {
            total as f64 / count as f64
        },
        max_length,
        node_count: cs.node_universe().len(),
    }
}
