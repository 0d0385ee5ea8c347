//! Recursive balanced-min-cut hierarchical clustering with pluggable cut
//! finders, and the balanced-cut lower bound on the optimum.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{max_side_for, Cut, WeightedGraph};
use crate::oracle::exact_balanced_min_cut;
use crate::spectral;
use crate::tree::{HCTree, NodeId, TreeBuilder};

pub const DEFAULT_BETA: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinderKind {
    Exact,
    SpectralRefine,
    RandomRestart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFinder {
    pub kind: FinderKind,
    /// Random starting bisections (random_restart only).
    pub restarts: usize,
    pub refine_passes: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl CutFinder {
    pub fn exact() -> Self {
        CutFinder {
            kind: FinderKind::Exact,
            restarts: 0,
            refine_passes: 0,
            power_iters: 0,
            seed: 0,
        }
    }

    pub fn spectral(seed: u64) -> Self {
        CutFinder {
            kind: FinderKind::SpectralRefine,
            restarts: 0,
            refine_passes: 8,
            power_iters: 200,
            seed,
        }
    }

    pub fn random_restart(seed: u64, restarts: usize) -> Self {
        CutFinder {
            kind: FinderKind::RandomRestart,
            restarts,
            refine_passes: 8,
            power_iters: 200,
            seed,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == FinderKind::Exact
    }

    /// A `beta`-balanced cut of the subgraph induced by `subset`.
    pub fn find_cut(&self, g: &WeightedGraph, subset: &[usize], beta: f64) -> Result<Cut> {
        match self.kind {
            FinderKind::Exact => exact_balanced_min_cut(g, subset, beta),
            _ => spectral_refine_cut(g, subset, beta, self),
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 0.5 {
        Ok(())
    } else {
        Err(Error::arg(format!("beta must lie in (0, 1/2], got {beta}")))
    }
}

/// Heuristic balanced cut: zero-weight component packing when possible,
/// otherwise sweeps over a Fiedler ordering, a BFS ordering and the id
/// ordering (plus random bisections for `random_restart`), each refined by
/// balance-preserving FM passes. The lightest candidate wins; earlier
/// candidates win ties.
pub fn spectral_refine_cut(g: &WeightedGraph, subset: &[usize], beta: f64, params: &CutFinder) -> Result<Cut> {
    check_beta(beta)?;
    let mut vertices = subset.to_vec();
    vertices.sort_unstable();
    let k = vertices.len();
    if k < 2 {
        return Err(Error::arg(format!("no balanced bipartition of a {k}-vertex set")));
    }
    let h = g.induced(&vertices)?;
    let hi = max_side_for(k, beta);
    let lo = k - hi;
    let seed = splitmix(params.seed ^ splitmix(vertices[0] as u64) ^ splitmix(k as u64).rotate_left(17));

    let side = if k == 2 {
        vec![true, false]
    } else if let Some(side) = spectral::pack_components(&h, hi) {
        side
    } else {
        let mut best: Option<(Vec<bool>, f64)> = None;
        let mut consider = |mut side: Vec<bool>| {
            let w = spectral::fm_refine(&h, &mut side, lo, hi, params.refine_passes);
            if best.as_ref().is_none_or(|(_, bw)| w < *bw) {
                best = Some((side, w));
            }
        };
        if let Some(f) = spectral::fiedler(&h, params.power_iters, seed) {
            let order = spectral::order_by(&f.embedding);
            consider(spectral::sweep_balanced(&h, &order, lo, hi).0);
        }
        consider(spectral::sweep_balanced(&h, &spectral::bfs_order(&h), lo, hi).0);
        let ids: Vec<usize> = (0..k).collect();
        consider(spectral::sweep_balanced(&h, &ids, lo, hi).0);
        if params.kind == FinderKind::RandomRestart {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..params.restarts {
                consider(spectral::random_mask(k, k / 2, &mut rng));
            }
        }
        best.expect("at least one candidate").0
    };

    let (mut a, mut b): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    for (i, &v) in vertices.iter().enumerate() {
        if side[i] {
            a.push(v);
        } else {
            b.push(v);
        }
    }
    if b.first() == Some(&vertices[0]) {
        std::mem::swap(&mut a, &mut b);
    }
    Cut::new(g, a, b)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub words_peak: usize,
    pub passes: usize,
    pub cut_calls: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub cost: f64,
    pub lower_bound: f64,
    pub lower_bound_certified: bool,
    /// `cost / lower_bound`, absent when the bound is zero.
    pub ratio_certificate: Option<f64>,
    #[serde(serialize_with = "crate::tree::serialize_as_text")]
    pub tree: HCTree,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub certified: bool,
}

/// Top-down tree: each node with two or more vertices is split by the
/// finder's balanced cut of its induced subgraph. The child holding the
/// smaller vertex id comes first.
pub fn recursive_balanced_hc(g: &WeightedGraph, beta: f64, finder: &CutFinder) -> Result<HCTree> {
    Ok(recursive_with_stats(g, beta, finder)?.0)
}

pub(crate) fn recursive_with_stats(g: &WeightedGraph, beta: f64, finder: &CutFinder) -> Result<(HCTree, usize)> {
    check_beta(beta)?;
    if g.n() == 0 {
        return Err(Error::arg("cannot cluster an empty graph"));
    }
    let mut builder = TreeBuilder::new();
    let mut calls = 0;
    let all: Vec<usize> = (0..g.n()).collect();
    let root = split(g, &all, beta, finder, &mut builder, &mut calls)?;
    Ok((builder.finish(root)?, calls))
}

fn split(
    g: &WeightedGraph,
    vertices: &[usize],
    beta: f64,
    finder: &CutFinder,
    b: &mut TreeBuilder,
    calls: &mut usize,
) -> Result<NodeId> {
    if vertices.len() == 1 {
        return Ok(b.leaf(vertices[0]));
    }
    *calls += 1;
    let cut = finder.find_cut(g, vertices, beta).map_err(|e| Error::Solver {
        size: vertices.len(),
        msg: e.to_string(),
    })?;
    if cut.side_a.is_empty() || cut.side_b.is_empty() || cut.len() != vertices.len() {
        return Err(Error::Solver {
            size: vertices.len(),
            msg: "finder returned an invalid bipartition".into(),
        });
    }
    let (first, second) = if cut.side_a[0] < cut.side_b[0] {
        (&cut.side_a, &cut.side_b)
    } else {
        (&cut.side_b, &cut.side_a)
    };
    let x = split(g, first, beta, finder, b, calls)?;
    let y = split(g, second, beta, finder, b, calls)?;
    b.join(x, y)
}

/// `(n/3) * w(minimum 1/3-balanced cut)`; certified only for the exact
/// finder. Zero for `n < 3`.
pub fn lower_bound_balanced(g: &WeightedGraph, finder: &CutFinder) -> Result<LowerBound> {
    let n = g.n();
    if n < 3 {
        return Ok(LowerBound {
            value: 0.0,
            certified: true,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let cut = finder.find_cut(g, &all, 1.0 / 3.0)?;
    Ok(LowerBound {
        value: n as f64 / 3.0 * cut.weight,
        certified: finder.is_exact(),
    })
}

/// Solves offline and packages cost, certificate and metrics. The stored
/// words are the graph's edges at three words each.
pub fn solve(g: &WeightedGraph, beta: f64, finder: &CutFinder) -> Result<CostReport> {
    let start = Instant::now();
    let (tree, cut_calls) = recursive_with_stats(g, beta, finder)?;
    let cost = tree.cost_lca(g)?;
    let lb = lower_bound_balanced(g, finder)?;
    Ok(report(
        tree,
        cost,
        lb,
        Metrics {
            words_peak: 3 * g.m(),
            passes: 0,
            cut_calls: cut_calls + usize::from(g.n() >= 3),
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    ))
}

pub(crate) fn report(tree: HCTree, cost: f64, lb: LowerBound, metrics: Metrics) -> CostReport {
    CostReport {
        cost,
        lower_bound: lb.value,
        lower_bound_certified: lb.certified,
        ratio_certificate: (lb.value > 0.0).then(|| cost / lb.value),
        tree,
        metrics,
    }
}
