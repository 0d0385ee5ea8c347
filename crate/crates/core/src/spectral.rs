//! Spectral orderings, sweep cuts and balance-preserving local refinement.
//!
//! Everything here works on a graph whose vertex ids are local (`0..k`);
//! callers relabel with [`WeightedGraph::induced`] first.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedGraph;

/// Approximate second eigenvector of the normalized adjacency, rescaled by
/// `1/sqrt(d)`, together with the Rayleigh estimate of the second smallest
/// normalized Laplacian eigenvalue.
#[derive(Debug, Clone)]
pub struct Fiedler {
    pub embedding: Vec<f64>,
    pub lambda2: f64,
}

/// Power iteration on `(I + D^-1/2 A D^-1/2) / 2`, deflated against the
/// top eigenvector of every connected component. Returns `None` when the
/// iterate collapses (edgeless graph, or one vertex per component).
pub fn fiedler(g: &WeightedGraph, iters: usize, seed: u64) -> Option<Fiedler> {
    let k = g.n();
    if k < 2 || g.m() == 0 {
        return None;
    }
    let deg: Vec<f64> = (0..k).map(|v| g.weighted_degree(v)).collect();
    let inv_sqrt: Vec<f64> = deg
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let comps = g.components();
    let tops: Vec<(Vec<usize>, Vec<f64>)> = comps
        .into_iter()
        .filter_map(|c| {
            let norm: f64 = c.iter().map(|&v| deg[v]).sum::<f64>().sqrt();
            (norm > 0.0).then(|| {
                let vals = c.iter().map(|&v| deg[v].sqrt() / norm).collect();
                (c, vals)
            })
        })
        .collect();
    let deflate = |x: &mut [f64]| {
        for (c, u) in &tops {
            let dot: f64 = c.iter().zip(u).map(|(&v, &uv)| x[v] * uv).sum();
            for (&v, &uv) in c.iter().zip(u) {
                x[v] -= dot * uv;
            }
        }
    };
    let normalize = |x: &mut [f64]| -> bool {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return false;
        }
        x.iter_mut().for_each(|a| *a /= norm);
        true
    };
    let apply = |x: &[f64], y: &mut [f64]| {
        for v in 0..k {
            let mut s = 0.0;
            for adj in g.neighbors(v) {
                s += adj.w * inv_sqrt[adj.to] * x[adj.to];
            }
            y[v] = 0.5 * (x[v] + inv_sqrt[v] * s);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut x);
    if !normalize(&mut x) {
        return None;
    }
    let mut y = vec![0.0; k];
    for _ in 0..iters.max(1) {
        apply(&x, &mut y);
        deflate(&mut y);
        if !normalize(&mut y) {
            return None;
        }
        std::mem::swap(&mut x, &mut y);
    }
    apply(&x, &mut y);
    let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let embedding = x
        .iter()
        .zip(&inv_sqrt)
        .map(|(&a, &s)| if s > 0.0 { a * s } else { a })
        .collect();
    Some(Fiedler {
        embedding,
        lambda2: (2.0 - 2.0 * mu).max(0.0),
    })
}

/// Vertices sorted by embedding value (ties by id).
pub fn order_by(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// BFS order from a pseudo-peripheral vertex (end of a double sweep from
/// the smallest id); unreached vertices follow in later BFS trees.
pub fn bfs_order(g: &WeightedGraph) -> Vec<usize> {
    let k = g.n();
    if k == 0 {
        return Vec::new();
    }
    let far = |start: usize| -> usize {
        let order = bfs_from(g, &[start], k);
        *order.last().expect("start is reached")
    };
    let start = far(far(0));
    let mut order = bfs_from(g, &[start], k);
    if order.len() < k {
        let mut seen = vec![false; k];
        for &v in &order {
            seen[v] = true;
        }
        for v in 0..k {
            if !seen[v] {
                for u in bfs_from(g, &[v], k) {
                    if !seen[u] {
                        seen[u] = true;
                        order.push(u);
                    }
                }
            }
        }
    }
    order
}

fn bfs_from(g: &WeightedGraph, starts: &[usize], k: usize) -> Vec<usize> {
    let mut seen = vec![false; k];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for &s in starts {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        out.push(v);
        for adj in g.neighbors(v) {
            if !seen[adj.to] {
                seen[adj.to] = true;
                queue.push_back(adj.to);
            }
        }
    }
    out
}

/// Cut weight of every prefix `order[..s]` for `s = 1..k-1`, indexed by `s`.
pub fn prefix_cuts(g: &WeightedGraph, order: &[usize]) -> Vec<f64> {
    let k = g.n();
    let mut in_a = vec![false; k];
    let mut cuts = vec![0.0; k];
    let mut cut = 0.0;
    for (s, &v) in order.iter().enumerate().take(k.saturating_sub(1)) {
        let mut to_a = 0.0;
        let mut total = 0.0;
        for adj in g.neighbors(v) {
            total += adj.w;
            if in_a[adj.to] {
                to_a += adj.w;
            }
        }
        in_a[v] = true;
        cut += total - 2.0 * to_a;
        cuts[s + 1] = cut;
    }
    cuts
}

/// Best prefix of `order` with size in `lo..=hi`; returns the membership
/// mask and its weight.
pub fn sweep_balanced(g: &WeightedGraph, order: &[usize], lo: usize, hi: usize) -> (Vec<bool>, f64) {
    let cuts = prefix_cuts(g, order);
    let mut best_s = lo;
    for s in lo..=hi {
        if cuts[s] < cuts[best_s] {
            best_s = s;
        }
    }
    let mut side = vec![false; g.n()];
    for &v in &order[..best_s] {
        side[v] = true;
    }
    (side, cuts[best_s].max(0.0))
}

/// Exact weight of the cut given by a membership mask.
pub fn mask_weight(g: &WeightedGraph, side: &[bool]) -> f64 {
    g.edges().iter().filter(|e| side[e.u] != side[e.v]).map(|e| e.w).sum()
}

/// Fiduccia–Mattheyses passes keeping the `true` side within `lo..=hi`.
/// Intermediate states may leave the range by one vertex; only in-range
/// prefixes are kept. Returns the refined weight.
pub fn fm_refine(g: &WeightedGraph, side: &mut [bool], lo: usize, hi: usize, passes: usize) -> f64 {
    let k = g.n();
    let mut weight = mask_weight(g, side);
    let mut size_a = side.iter().filter(|&&s| s).count();
    for _ in 0..passes {
        let mut gain: Vec<f64> = (0..k)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .map(|adj| if side[adj.to] != side[v] { adj.w } else { -adj.w })
                    .sum()
            })
            .collect();
        let mut locked = vec![false; k];
        let mut moves = Vec::new();
        let mut cum = 0.0;
        let mut best_cum = 0.0;
        let mut best_len = 0;
        for _ in 0..k {
            let mut pick: Option<usize> = None;
            for v in 0..k {
                if locked[v] {
                    continue;
                }
                let next = if side[v] { size_a - 1 } else { size_a + 1 };
                if next + 1 < lo || next > hi + 1 {
                    continue;
                }
                if pick.is_none_or(|p| gain[v] > gain[p]) {
                    pick = Some(v);
                }
            }
            let Some(v) = pick else { break };
            cum += gain[v];
            if side[v] {
                size_a -= 1;
            } else {
                size_a += 1;
            }
            side[v] = !side[v];
            locked[v] = true;
            gain[v] = -gain[v];
            for adj in g.neighbors(v) {
                if side[adj.to] == side[v] {
                    gain[adj.to] -= 2.0 * adj.w;
                } else {
                    gain[adj.to] += 2.0 * adj.w;
                }
            }
            moves.push(v);
            if (lo..=hi).contains(&size_a) && cum > best_cum + 1e-12 {
                best_cum = cum;
                best_len = moves.len();
            }
        }
        for &v in moves[best_len..].iter().rev() {
            if side[v] {
                size_a -= 1;
            } else {
                size_a += 1;
            }
            side[v] = !side[v];
        }
        if best_len == 0 {
            break;
        }
        weight = mask_weight(g, side);
    }
    weight
}

/// Packs whole components into two bins, largest first, always into the
/// lighter bin. Returns the `true`-side mask when the larger bin fits in `hi`.
pub fn pack_components(g: &WeightedGraph, hi: usize) -> Option<Vec<bool>> {
    let mut comps = g.components();
    if comps.len() < 2 {
        return None;
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut side = vec![false; g.n()];
    let (mut a, mut b) = (0usize, 0usize);
    for c in &comps {
        if a <= b {
            a += c.len();
            for &v in c {
                side[v] = true;
            }
        } else {
            b += c.len();
        }
    }
    (a.max(b) <= hi && a > 0 && b > 0).then_some(side)
}

/// Uniformly random mask with exactly `size` vertices on the `true` side.
pub fn random_mask<R: Rng + ?Sized>(k: usize, size: usize, rng: &mut R) -> Vec<bool> {
    let mut ids: Vec<usize> = (0..k).collect();
    ids.shuffle(rng);
    let mut side = vec![false; k];
    for &v in &ids[..size] {
        side[v] = true;
    }
    side
}
