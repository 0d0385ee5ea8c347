//! Cut sparsification by connectivity-weighted edge sampling, offline and
//! over a stream with merge-and-reduce.
//!
//! Each edge gets a connectivity label from a weighted maximum-adjacency
//! scan (the index of the last sparse forest it belongs to), is kept with
//! probability `p = min(1, rho * w / label)` and is reweighted to `w / p`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::stream::{EdgeStream, Meter};

pub const WORDS_PER_EDGE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    /// Oversampling constant `C` in `rho = C log^2 n / eps^2` and in the
    /// size target `C n log^3 n / eps^2`.
    pub c: f64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig { c: 6.0 }
    }
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

pub fn rho(n: usize, epsilon: f64, cfg: &SparsifyConfig) -> f64 {
    cfg.c * log2n(n).powi(2) / (epsilon * epsilon)
}

/// Edge-count target `ceil(C n log^3 n / eps^2)`.
pub fn target_edges(n: usize, epsilon: f64, cfg: &SparsifyConfig) -> usize {
    (cfg.c * n as f64 * log2n(n).powi(3) / (epsilon * epsilon)).ceil() as usize
}

pub fn budget_words(n: usize, epsilon: f64, cfg: &SparsifyConfig) -> usize {
    WORDS_PER_EDGE * target_edges(n, epsilon, cfg)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    // larger attachment first, then smaller vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Connectivity labels indexed like `g.edges()`. Scanning `x` in maximum
/// adjacency order assigns each edge to an unscanned `y` the label
/// `r(y) + w`, where `r(y)` is the weight already attached from scanned
/// vertices; the endpoints of every edge are then at least that connected.
pub fn connectivity_labels(g: &WeightedGraph) -> Vec<f64> {
    let n = g.n();
    let mut label = vec![0.0; g.m()];
    let mut attach = vec![0.0f64; n];
    let mut scanned = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut next_start = 0;
    loop {
        let x = match heap.pop() {
            Some(Key(r, v)) => {
                if scanned[v] || r != attach[v] {
                    continue;
                }
                v
            }
            None => {
                while next_start < n && scanned[next_start] {
                    next_start += 1;
                }
                if next_start == n {
                    break;
                }
                next_start
            }
        };
        scanned[x] = true;
        for adj in g.neighbors(x) {
            let y = adj.to;
            if scanned[y] {
                continue;
            }
            attach[y] += adj.w;
            label[adj.edge] = attach[y];
            heap.push(Key(attach[y], y));
        }
    }
    label
}

/// Offline sparsifier with the default constant.
pub fn offline_sparsify(g: &WeightedGraph, epsilon: f64, seed: u64) -> Result<WeightedGraph> {
    offline_sparsify_with(g, epsilon, seed, &SparsifyConfig::default())
}

/// Returns `g` itself when it already has at most the target number of
/// edges; otherwise samples.
pub fn offline_sparsify_with(
    g: &WeightedGraph,
    epsilon: f64,
    seed: u64,
    cfg: &SparsifyConfig,
) -> Result<WeightedGraph> {
    check_epsilon(epsilon)?;
    if g.m() <= target_edges(g.n(), epsilon, cfg) {
        return Ok(g.clone());
    }
    Ok(sample(g, rho(g.n(), epsilon, cfg), seed))
}

/// The sampling step alone, without the small-input shortcut. One uniform
/// draw per edge in canonical edge order.
pub fn sample(g: &WeightedGraph, rho: f64, seed: u64) -> WeightedGraph {
    let labels = connectivity_labels(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::new();
    for (e, &lambda) in g.edges().iter().zip(&labels) {
        let p = (rho * e.w / lambda).min(1.0);
        let draw: f64 = rng.gen();
        if draw < p {
            kept.push(Edge::new(e.u, e.v, e.w / p));
        }
    }
    WeightedGraph::from_edges(g.n(), kept).expect("sampled edges come from a valid graph")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsifierState {
    pub epsilon: f64,
    /// Edges held per merge level when the pass ended.
    pub level_buffers: Vec<usize>,
    /// Per-buffer edge target `T`; a buffer is reduced above `2T`.
    pub target_size: usize,
    pub budget_words: usize,
    pub words_peak: usize,
    pub seed: u64,
    pub edges_in: usize,
    pub edges_out: usize,
    pub reductions: usize,
    /// True when some reduction dropped or reweighted an edge.
    pub sampled: bool,
}

/// Single pass of merge-and-reduce. Edges enter level 0; a level below `L`
/// holding more than `2T` edges is sampled at accuracy `eps / (2L)`, with
/// `L = max(1, ceil(log2(m / T)))`, and its output moves up one level.
/// Level `L` is never reduced again. The result is the union of all levels
/// with parallel edges merged.
pub fn stream_sparsify(
    stream: &mut EdgeStream,
    n: usize,
    epsilon: f64,
    seed: u64,
    cfg: &SparsifyConfig,
) -> Result<(WeightedGraph, SparsifierState)> {
    check_epsilon(epsilon)?;
    if n != stream.n() {
        return Err(Error::arg(format!(
            "declared n = {n} but the stream has n = {}",
            stream.n()
        )));
    }
    let target = target_edges(n, epsilon, cfg);
    let m = stream.len();
    let depth = if m > target {
        ((m as f64 / target as f64).log2().ceil() as usize).max(1)
    } else {
        1
    };
    let level_eps = epsilon / (2.0 * depth as f64);
    let mut levels: Vec<Vec<Edge>> = vec![Vec::new(); depth + 1];
    let mut meter = Meter::default();
    let mut reductions = 0;
    let mut sampled = false;
    let mut edges_in = 0;

    while let Some(e) = stream.next_edge()? {
        edges_in += 1;
        meter.alloc(WORDS_PER_EDGE);
        levels[0].push(e);
        let mut lvl = 0;
        while lvl < depth && levels[lvl].len() > 2 * target {
            let buffer = std::mem::take(&mut levels[lvl]);
            let held = buffer.len();
            let g = WeightedGraph::from_edges(n, buffer)?;
            let reduce_seed = seed ^ (reductions as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let h = sample(&g, rho(n, level_eps, cfg), reduce_seed);
            reductions += 1;
            sampled |= h != g;
            meter.alloc(WORDS_PER_EDGE * h.m());
            meter.free(WORDS_PER_EDGE * held);
            levels[lvl + 1].extend_from_slice(h.edges());
            lvl += 1;
        }
    }
    if edges_in != m {
        return Err(Error::Stream(format!("read {edges_in} edges but {m} were declared")));
    }
    let level_buffers: Vec<usize> = levels.iter().map(Vec::len).collect();
    let h = WeightedGraph::from_edges(n, levels.into_iter().flatten())?;
    let state = SparsifierState {
        epsilon,
        level_buffers,
        target_size: target,
        budget_words: WORDS_PER_EDGE * target,
        words_peak: meter.words_peak,
        seed,
        edges_in,
        edges_out: h.m(),
        reductions,
        sampled,
    };
    Ok((h, state))
}
