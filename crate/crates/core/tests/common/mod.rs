//! Shared test helpers: a dense brute-force reference for the scoring
//! pipeline, random cascade generators and the desk-scale benchmark setup.
#![allow(dead_code)]

use netinfer_core::cascade::{Cascade, CascadeSet, IdMap, NodeId};
use netinfer_core::graph::{CommunitySizes, GenConfig};
use netinfer_core::sim::SimConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Raw cascades as `(node index, time)` lists; infinite times mean "not
/// infected".
pub type RawCascade = Vec<(usize, f64)>;

/// Straight-line dense evaluation of every quantity, written without any of
/// the library's data structures.
pub struct Reference {
    pub n: usize,
    /// Row-normalised sum of per-cascade transition matrices.
    pub p_c: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub baseline: Vec<Vec<f64>>,
}

/// 1-based labels by ascending `(time, node)`; uninfected nodes get 0.
pub fn reference_labels(n: usize, c: &RawCascade) -> Vec<usize> {
    let mut finite: Vec<(f64, usize)> = c
        .iter()
        .filter(|(_, t)| t.is_finite())
        .map(|&(v, t)| (t, v))
        .collect();
    finite.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut label = vec![0; n];
    for (rank, &(_, v)) in finite.iter().enumerate() {
        label[v] = rank + 1;
    }
    label
}

pub fn reference(n: usize, cascades: &[RawCascade]) -> Reference {
    let labels: Vec<Vec<usize>> = cascades.iter().map(|c| reference_labels(n, c)).collect();

    let mut p_temp = vec![vec![0.0; n]; n];
    let mut baseline = vec![vec![0.0; n]; n];
    for l in &labels {
        let mut d = vec![vec![0.0; n]; n];
        for u in 0..n {
            for v in 0..n {
                if l[u] > 0 && l[v] > 0 && l[u] < l[v] {
                    let (lu, lv) = (l[u] as f64, l[v] as f64);
                    d[u][v] = 1.0 / (lv * (lv - lu));
                    baseline[u][v] += 1.0 / (lv - lu);
                }
            }
        }
        for u in 0..n {
            let du: f64 = d[u].iter().sum();
            if du > 0.0 {
                for v in 0..n {
                    p_temp[u][v] += d[u][v] / du;
                }
            }
        }
    }
    let mut p_c = vec![vec![0.0; n]; n];
    for u in 0..n {
        let row: f64 = p_temp[u].iter().sum();
        if row > 0.0 {
            for v in 0..n {
                p_c[u][v] = p_temp[u][v] / row;
            }
        }
    }

    let mut psi = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let in_u = |c: &Vec<usize>| c[u] > 0;
            let in_v = |c: &Vec<usize>| c[v] > 0;
            let union = labels.iter().filter(|c| in_u(c) || in_v(c)).count();
            let before = labels
                .iter()
                .filter(|c| in_u(c) && in_v(c) && c[u] < c[v])
                .count();
            if union > 0 {
                psi[u][v] = before as f64 / union as f64;
            }
        }
    }

    let mut alpha = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in 0..n {
            alpha[u][v] = p_c[u][v] * psi[u][v];
        }
    }
    Reference {
        n,
        p_c,
        psi,
        alpha,
        baseline,
    }
}

/// Library view of raw cascades over nodes `0..n`.
pub fn to_set(n: usize, cascades: &[RawCascade]) -> CascadeSet {
    let cs = cascades
        .iter()
        .map(|c| Cascade::new(c.iter().map(|&(v, t)| (NodeId(v as u32), t)).collect()).unwrap())
        .collect();
    CascadeSet::new(cs, IdMap::identity(n))
}

/// A random cascade over `n` nodes. With `tied` the times are small
/// integers, so equal times are common.
pub fn random_cascade(rng: &mut impl Rng, n: usize, max_len: usize, tied: bool) -> RawCascade {
    let len = rng.random_range(0..=max_len.min(n));
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let v = nodes.swap_remove(rng.random_range(0..nodes.len()));
        let t = if rng.random_bool(0.05) {
            f64::INFINITY
        } else if tied {
            f64::from(rng.random_range(0..4u32))
        } else {
            rng.random::<f64>() * 100.0
        };
        out.push((v, t));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Planted partition used by the trend benchmarks: 128 nodes in four
/// communities of 32, average degree 16.
pub fn bench_graph(mu: f64, seed: u64) -> GenConfig {
    GenConfig {
        n: 128,
        communities: CommunitySizes::Fixed(vec![32; 4]),
        mu,
        avg_degree: 16.0,
        max_degree: 24,
        degree_exponent: 2.0,
        rng_seed: seed,
    }
}

pub fn bench_sim(count: usize, seed: u64) -> SimConfig {
    SimConfig {
        cascade_count: count,
        infection_prob: 0.1,
        max_cascade_size: Some(40),
        rng_seed: 1000 + seed,
        ..SimConfig::default()
    }
}

pub const BENCH_SEEDS: u64 = 10;
pub const BENCH_COUNTS: [usize; 4] = [250, 500, 1000, 2000];
pub const DETECTOR_SEED: u64 = 7;

/// Absolute tolerance between library and reference values.
pub const ORACLE_TOL: f64 = 1e-12;

/// Compares transition sums, similarity, combined scores and baseline scores
/// against [`reference`]. Returns the largest deviation seen.
pub fn check_against_reference(n: usize, cascades: &[RawCascade]) -> Result<f64, String> {
    use netinfer_core::inference::{
        aggregate_transitions, baseline_scores, build_participation_index, dani_scores,
    };
    let r = reference(n, cascades);
    let cs = to_set(n, cascades);
    let cvs = cs.vectors();
    let dim = cs.dimension();
    let p_c = aggregate_transitions(&cvs, dim);
    let idx = build_participation_index(&cvs, dim);
    let alpha = dani_scores(&cs);
    let base = baseline_scores(&cvs, dim);
    let mut worst: f64 = 0.0;
    for u in 0..n {
        for v in 0..n {
            let (a, b) = (NodeId(u as u32), NodeId(v as u32));
            let checks = [
                ("P_C", p_c.get(a, b), r.p_c[u][v]),
                ("psi", if u == v { 0.0 } else { idx.similarity(a, b) }, r.psi[u][v]),
                ("alpha", alpha.get(a, b), r.alpha[u][v]),
                ("baseline", base.get(a, b), r.baseline[u][v]),
            ];
            for (what, got, want) in checks {
                let err = (got - want).abs();
                worst = worst.max(err);
                if err > ORACLE_TOL {
                    return Err(format!(
                        "{what}({u},{v}) = {got}, reference {want}, cascades {cascades:?}"
                    ));
                }
            }
        }
    }
    Ok(worst)
}

/// Every cascade over `n` nodes in which each node is either absent or
/// infected at one of `levels` integer times (ties included).
pub fn time_patterns(n: usize, levels: usize) -> Vec<RawCascade> {
    let base = levels + 1;
    let total = base.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut c = Vec::new();
            for v in 0..n {
                let digit = code % base;
                code /= base;
                if digit > 0 {
                    c.push((v, (digit - 1) as f64));
                }
            }
            c
        })
        .collect()
}

/// Calls `f` on every multiset of `1..=max_size` items drawn from `items`.
pub fn for_each_multiset<T: Clone>(items: &[T], max_size: usize, mut f: impl FnMut(&[T])) {
    fn rec<T: Clone>(
        items: &[T],
        start: usize,
        left: usize,
        cur: &mut Vec<T>,
        f: &mut dyn FnMut(&[T]),
    ) {
        if !cur.is_empty() {
            f(cur);
        }
        if left == 0 {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            rec(items, i, left - 1, cur, f);
            cur.pop();
        }
    }
    rec(items, 0, max_size, &mut Vec::new(), &mut f);
}
