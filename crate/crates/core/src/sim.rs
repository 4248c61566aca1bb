//! Independent-cascade simulation with exponentially distributed
//! transmission delays.
//!
//! Every cascade draws from its own ChaCha stream (stream id = cascade
//! index), so cascade `i` is the same whether it is generated alone, as part
//! of a longer run, or on another worker thread.

use alloc::collections::BinaryHeap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cascade::{Cascade, CascadeSet, IdMap, NodeId};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionModel {
    /// Each newly infected node gets one chance per uninfected neighbour;
    /// successful transmissions arrive after an exponential delay.
    #[default]
    IndependentCascadeExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedStrategy {
    /// A single seed node drawn uniformly.
    #[default]
    UniformRandomNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: DiffusionModel,
    pub cascade_count: usize,
    /// Mean transmission delay.
    pub delay_scale: f64,
    pub infection_prob: f64,
    /// `None` means unbounded.
    pub max_cascade_size: Option<usize>,
    pub rng_seed: u64,
    pub seed_strategy: SeedStrategy,
    /// Attempts per cascade before giving up on reaching two infections.
    pub retry_cap: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            model: DiffusionModel::default(),
            cascade_count: 1000,
            delay_scale: 1.0,
            infection_prob: 0.1,
            max_cascade_size: None,
            rng_seed: 0,
            seed_strategy: SeedStrategy::default(),
            retry_cap: 1000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.cascade_count == 0 {
            return bad("cascade_count must be positive");
        }
        if !(self.delay_scale > 0.0 && self.delay_scale.is_finite()) {
            return bad("delay_scale must be positive");
        }
        if !(self.infection_prob > 0.0 && self.infection_prob <= 1.0) {
            return bad("infection_prob must lie in (0, 1]");
        }
        if self.max_cascade_size == Some(0) {
            return bad("max_cascade_size must be positive");
        }
        if self.retry_cap == 0 {
            return bad("retry_cap must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    node: NodeId,
}

impl Eq for Pending {}

impl Ord for Pending {
    // Min-heap on (time, node).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn spread(
    adj: &Adjacency,
    cfg: &SimConfig,
    delay: &Exp<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<(NodeId, f64)> {
    let n = adj.node_count();
    let limit = cfg.max_cascade_size.unwrap_or(usize::MAX);
    let seed = NodeId(rng.random_range(0..n as u32));
    let mut infected = Vec::new();
    let mut done = HashSet::new();
    let mut heap = BinaryHeap::new();
    heap.push(Pending {
        time: 0.0,
        node: seed,
    });
    while let Some(Pending { time, node }) = heap.pop() {
        if !done.insert(node) {
            continue;
        }
        infected.push((node, time));
        if infected.len() >= limit {
            break;
        }
        for &v in adj.neighbors(node) {
            if done.contains(&v) {
                continue;
            }
            if rng.random::<f64>() < cfg.infection_prob {
                heap.push(Pending {
                    time: time + delay.sample(rng),
                    node: v,
                });
            }
        }
    }
    infected
}

fn simulate_one(adj: &Adjacency, cfg: &SimConfig, delay: &Exp<f64>, index: usize) -> Result<Cascade> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(index as u64);
    for _ in 0..cfg.retry_cap {
        let entries = spread(adj, cfg, delay, &mut rng);
        if entries.len() >= 2 {
            return Cascade::new(entries);
        }
    }
    Err(Error::RetryCapExhausted {
        cascade: index,
        attempts: cfg.retry_cap,
    })
}

/// Generates `cfg.cascade_count` cascades over `g`.
pub fn simulate(g: &Graph, cfg: &SimConfig) -> Result<CascadeSet> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let adj = g.out_adjacency();
    let delay = Exp::new(1.0 / cfg.delay_scale)
        .map_err(|_| Error::InvalidConfig("delay_scale must be positive".to_string()))?;
    let run = |i: usize| simulate_one(&adj, cfg, &delay, i);
    #[cfg(feature = "parallel")]
    let cascades: Result<Vec<Cascade>> = (0..cfg.cascade_count).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let cascades: Result<Vec<Cascade>> = (0..cfg.cascade_count).map(run).collect();
    Ok(CascadeSet::new(cascades?, IdMap::identity(g.node_count())))
}

/// One cascade set per entry of `counts`; smaller sets are prefixes of larger ones.
pub fn simulate_batch(g: &Graph, cfg: &SimConfig, counts: &[usize]) -> Result<Vec<CascadeSet>> {
    let Some(&largest) = counts.iter().max() else {
        return Ok(Vec::new());
    };
    let full = simulate(
        g,
        &SimConfig {
            cascade_count: largest,
            ..cfg.clone()
        },
    )?;
    Ok(counts.iter().map(|&c| full.prefix(c)).collect())
}
