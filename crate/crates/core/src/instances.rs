//! Instance generators: classic graphs, noisy cycle-counting families,
//! one-vs-many-expanders matchings, and the clique gadgets.
//!
//! Generation is a pure function of the parameters and the seed.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::tree::{HCTree, TreeBuilder};

fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::arg(msg))
}

/// Path on `m` vertices.
pub fn path_vertices(m: usize) -> Result<WeightedGraph> {
    if m == 0 {
        return arg("a path needs at least one vertex");
    }
    WeightedGraph::from_unit_edges(m, (1..m).map(|i| (i - 1, i)))
}

/// Path with `m` edges (so `m + 1` vertices).
pub fn path_edges(m: usize) -> Result<WeightedGraph> {
    path_vertices(m + 1)
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return arg(format!("a cycle needs at least three vertices, got {n}"));
    }
    WeightedGraph::from_unit_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn clique(n: usize) -> Result<WeightedGraph> {
    if n == 0 {
        return arg("a clique needs at least one vertex");
    }
    WeightedGraph::from_unit_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

fn clique_edges(vertices: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    vertices
        .iter()
        .enumerate()
        .flat_map(move |(i, &u)| vertices[i + 1..].iter().map(move |&v| (u, v)))
}

/// Erdős–Rényi graph: each pair independently with probability `p`, with
/// integer weights uniform in `1..=max_weight`.
pub fn gen_gnp(n: usize, p: f64, max_weight: u32, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) || max_weight == 0 {
        return arg("p must lie in [0, 1] and max_weight must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                let w = rng.gen_range(1..=max_weight);
                edges.push(Edge::new(u, v, w as f64));
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// Noisy cycle counting instance. Case 1: two cycles of length `n/8`;
/// case 2: `n/(8k)` cycles of length `2k`. Both add `3n/(4k)` paths on
/// `k` vertices. `n` is first rounded down to a multiple of `8k`.
#[derive(Debug, Clone)]
pub struct NocInstance {
    pub graph: WeightedGraph,
    pub n_effective: usize,
    pub cycle_lengths: Vec<usize>,
    pub paths: usize,
}

pub fn gen_noc(n: usize, k: usize, case: u8) -> Result<NocInstance> {
    if case != 1 && case != 2 {
        return arg(format!("noisy cycle case must be 1 or 2, got {case}"));
    }
    if k < 2 {
        return arg("k must be at least 2");
    }
    if (k as f64) >= (n as f64).sqrt() {
        return arg(format!("k = {k} must be below sqrt(n) = {:.2}", (n as f64).sqrt()));
    }
    let n_eff = n / (8 * k) * (8 * k);
    let cycle_lengths = if case == 1 {
        vec![n_eff / 8; 2]
    } else {
        vec![2 * k; n_eff / (8 * k)]
    };
    if cycle_lengths.iter().any(|&l| l < 3) {
        return arg("n too small for cycles of length three or more");
    }
    let paths = 3 * n_eff / (4 * k);
    let mut edges = Vec::new();
    let mut next = 0;
    for &len in &cycle_lengths {
        edges.extend((0..len).map(|i| (next + i, next + (i + 1) % len)));
        next += len;
    }
    for _ in 0..paths {
        edges.extend((1..k).map(|i| (next + i - 1, next + i)));
        next += k;
    }
    debug_assert_eq!(next, n_eff);
    Ok(NocInstance {
        graph: WeightedGraph::from_unit_edges(n_eff, edges)?,
        n_effective: n_eff,
        cycle_lengths,
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvmeCase {
    Yes,
    No,
}

#[derive(Debug, Clone)]
pub struct OvmeInstance {
    pub graph: WeightedGraph,
    /// Hidden class of every vertex.
    pub classes: Vec<usize>,
}

fn push_matching<R: Rng>(pool: &mut [usize], pairs: usize, rng: &mut R, edges: &mut Vec<Edge>) {
    pool.shuffle(rng);
    for p in pool.chunks_exact(2).take(pairs) {
        edges.push(Edge::new(p[0], p[1], 1.0));
    }
}

/// Union of `k` matchings. The hidden equipartition into `t` classes is
/// always sampled; in the Yes case each matching has `n/4` uniform edges
/// on all of `[n]`, in the No case `n/(4t)` uniform edges inside each
/// class. Repeated pairs merge into heavier edges.
pub fn gen_ovme(n: usize, k: usize, t: usize, case: OvmeCase, seed: u64) -> Result<OvmeInstance> {
    if t == 0 || k == 0 {
        return arg("k and t must be positive");
    }
    if n == 0 || !n.is_multiple_of(4 * t) {
        return arg(format!("n = {n} must be a positive multiple of 4t = {}", 4 * t));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let class_size = n / t;
    let mut classes = vec![0; n];
    let members: Vec<Vec<usize>> = order.chunks(class_size).map(|c| c.to_vec()).collect();
    for (c, m) in members.iter().enumerate() {
        for &v in m {
            classes[v] = c;
        }
    }
    let mut edges = Vec::with_capacity(k * n / 4);
    let mut all: Vec<usize> = (0..n).collect();
    let mut per_class = members.clone();
    for _ in 0..k {
        match case {
            OvmeCase::Yes => push_matching(&mut all, n / 4, &mut rng, &mut edges),
            OvmeCase::No => {
                for pool in per_class.iter_mut() {
                    push_matching(pool, n / (4 * t), &mut rng, &mut edges);
                }
            }
        }
    }
    Ok(OvmeInstance {
        graph: WeightedGraph::from_edges(n, edges)?,
        classes,
    })
}

/// Two vertex sets, in order.
pub type Bipartition = (Vec<usize>, Vec<usize>);

/// Two `s`-cliques on `0..s` and `s..2s` joined by `cross` distinct
/// uniformly random cross edges. Requires `cross <= s^2 / 2`.
pub fn gen_two_clique_gadget(s: usize, cross: usize, seed: u64) -> Result<(WeightedGraph, Bipartition)> {
    if s == 0 {
        return arg("clique size must be positive");
    }
    if 2 * cross > s * s {
        return arg(format!("cross = {cross} exceeds s^2/2 = {}", s * s / 2));
    }
    let left: Vec<usize> = (0..s).collect();
    let right: Vec<usize> = (s..2 * s).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = clique_edges(&left).chain(clique_edges(&right)).collect();
    for idx in index::sample(&mut rng, s * s, cross).into_vec() {
        edges.push((idx / s, s + idx % s));
    }
    Ok((WeightedGraph::from_unit_edges(2 * s, edges)?, (left, right)))
}

/// Four `s`-cliques `S1..S4` on consecutive id blocks. `u = S1[0]` and
/// `v = S2[0]` carry every edge leaving `S1` and `S2`: `e12 <= 1` edge
/// `(u, v)`, `e14` edges from `u` into `S4`, `e23` from `v` into `S3`, and
/// `e34` random `S3`-`S4` pairs.
pub fn gen_four_clique_gadget(
    s: usize,
    e12: usize,
    e14: usize,
    e23: usize,
    e34: usize,
    seed: u64,
) -> Result<(WeightedGraph, [Vec<usize>; 4])> {
    if s == 0 || e12 > 1 || e14 > s || e23 > s || e34 > s * s {
        return arg("four-clique parameters out of range");
    }
    let parts: [Vec<usize>; 4] = std::array::from_fn(|i| (i * s..(i + 1) * s).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = parts.iter().flat_map(|p| clique_edges(p)).collect();
    let (u, v) = (parts[0][0], parts[1][0]);
    if e12 == 1 {
        edges.push((u, v));
    }
    for i in index::sample(&mut rng, s, e14).into_vec() {
        edges.push((u, parts[3][i]));
    }
    for i in index::sample(&mut rng, s, e23).into_vec() {
        edges.push((v, parts[2][i]));
    }
    for idx in index::sample(&mut rng, s * s, e34).into_vec() {
        edges.push((parts[2][idx / s], parts[3][idx % s]));
    }
    Ok((WeightedGraph::from_unit_edges(4 * s, edges)?, parts))
}

/// Closed-form cost of the prescribed tree with and without the edge `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub edge_present: f64,
    pub edge_absent: f64,
}

#[derive(Debug, Clone)]
pub struct IndexGadget {
    pub graph: WeightedGraph,
    /// Split order of the prescribed tree: first part, second part, then the
    /// two remaining parts.
    pub parts: [Vec<usize>; 4],
    pub u: usize,
    pub v: usize,
    pub edge_uv: bool,
    pub prescribed: HCTree,
    pub closed_form: ClosedForm,
}

impl IndexGadget {
    /// The closed form matching the instance's actual `(u, v)` bit.
    pub fn expected_cost(&self) -> f64 {
        if self.edge_uv {
            self.closed_form.edge_present
        } else {
            self.closed_form.edge_absent
        }
    }
}

/// Uniform `n x n` bit matrix.
pub fn random_bits(n: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
}

/// The `16N`-vertex four-clique gadget. Vertices: `L = 0..N`,
/// `R = N..2N`, then the extra blocks of sizes `4N-1, 4N-1, 3N+1, 3N+1` in
/// that order. `u = L[i]`, `v = R[j]`; edge `(L[a], R[b])` exists iff
/// `x[a][b]`.
///
/// The prescribed tree cuts off the part whose special vertex has the
/// smaller degree in `x` (ties: `u`), then the other, then separates the
/// remaining two; each clique is split into a balanced binary tree.
pub fn gen_index_gadget(n_param: usize, x: &[Vec<bool>], i: usize, j: usize) -> Result<IndexGadget> {
    let n = n_param;
    if n == 0 {
        return arg("N must be positive");
    }
    if x.len() != n || x.iter().any(|row| row.len() != n) {
        return arg(format!("x must be {n} x {n}"));
    }
    if i >= n || j >= n {
        return arg(format!("index ({i}, {j}) outside {n} x {n}"));
    }
    let (u, v) = (i, n + j);
    let mut next = 2 * n;
    let mut block = |len: usize| {
        let b: Vec<usize> = (next..next + len).collect();
        next += len;
        b
    };
    let s1: Vec<usize> = std::iter::once(u).chain(block(4 * n - 1)).collect();
    let s2: Vec<usize> = std::iter::once(v).chain(block(4 * n - 1)).collect();
    let mut s3: Vec<usize> = (0..n).filter(|&a| a != i).collect();
    s3.extend(block(3 * n + 1));
    let mut s4: Vec<usize> = (0..n).filter(|&b| b != j).map(|b| n + b).collect();
    s4.extend(block(3 * n + 1));
    let total = 16 * n;
    debug_assert_eq!(next, total);

    let mut deg = vec![0usize; 2 * n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (a, row) in x.iter().enumerate() {
        for (b, &bit) in row.iter().enumerate() {
            if bit {
                edges.push((a, n + b));
                deg[a] += 1;
                deg[n + b] += 1;
            }
        }
    }
    for p in [&s1, &s2, &s3, &s4] {
        edges.extend(clique_edges(p));
    }
    let graph = WeightedGraph::from_unit_edges(total, edges)?;
    let edge_uv = x[i][j];

    let (du, dv) = (deg[u], deg[v]);
    let u_first = du <= dv;
    let (d_first, d_second) = if u_first { (du, dv) } else { (dv, du) };
    let parts = if u_first { [s1, s2, s3, s4] } else { [s2, s1, s4, s3] };
    let others: usize = deg.iter().sum::<usize>() - du - dv;
    let nn = n as f64;
    let s = 4.0 * nn;
    let cliques = 4.0 / 3.0 * (s * s * s - s);
    let form = |uv: f64| {
        let e34 = 0.5 * (others as f64 - du as f64 - dv as f64 + 2.0 * uv);
        d_first as f64 * 16.0 * nn + (d_second as f64 - uv) * 12.0 * nn + e34 * 8.0 * nn + cliques
    };
    let closed_form = ClosedForm {
        edge_present: form(1.0),
        edge_absent: form(0.0),
    };

    let prescribed = prescribed_tree(&parts)?;
    Ok(IndexGadget {
        graph,
        parts,
        u,
        v,
        edge_uv,
        prescribed,
        closed_form,
    })
}

/// `(P1, (P2, (P3, P4)))` with balanced binary subtrees inside each part.
pub fn prescribed_tree(parts: &[Vec<usize>; 4]) -> Result<HCTree> {
    let mut b = TreeBuilder::new();
    let mut sorted = parts.clone();
    sorted.iter_mut().for_each(|p| p.sort_unstable());
    let t: Vec<_> = sorted.iter().map(|p| b.balanced(p)).collect::<Result<_>>()?;
    let low = b.join(t[2], t[3])?;
    let mid = b.join(t[1], low)?;
    let root = b.join(t[0], mid)?;
    b.finish(root)
}

fn part_weight(g: &WeightedGraph, label: &[usize], a: usize, b: usize) -> f64 {
    g.edges()
        .iter()
        .filter(|e| {
            let (x, y) = (label[e.u], label[e.v]);
            (x == a && y == b) || (x == b && y == a)
        })
        .map(|e| e.w)
        .sum()
}

/// Checks the structural conditions under which the four-part split order
/// is optimal: every part a clique, no `S1`-`S3` or `S2`-`S4` edges,
/// `|E12| + |E14| <= |E23| <= |E34|`, `|E12| <= 1`,
/// `1 <= |E14| <= |E23| <= 3s/8`, one outward vertex in `S1` and in `S2`,
/// `s^2/64 <= |E34| <= 3s^2/64` with no `S3`-`S4` weight above one.
pub fn four_clique_conditions(g: &WeightedGraph, parts: &[Vec<usize>; 4]) -> Result<bool> {
    let s = parts[0].len();
    if parts.iter().any(|p| p.len() != s) {
        return arg("the four parts must have equal sizes");
    }
    let mut label = vec![usize::MAX; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            if v >= g.n() || label[v] != usize::MAX {
                return arg("parts must be disjoint and inside the vertex set");
            }
            label[v] = i;
        }
    }
    if label.contains(&usize::MAX) {
        return arg("parts must cover the vertex set");
    }
    for p in parts {
        for (a, &x) in p.iter().enumerate() {
            for &y in &p[a + 1..] {
                if g.weight_between(x, y) == 0.0 {
                    return Ok(false);
                }
            }
        }
    }
    let e = |a, b| part_weight(g, &label, a, b);
    let (e12, e14, e23, e34) = (e(0, 1), e(0, 3), e(1, 2), e(2, 3));
    if e(0, 2) > 0.0 || e(1, 3) > 0.0 {
        return Ok(false);
    }
    let sf = s as f64;
    let ordered = e12 + e14 <= e23 && e23 <= e34;
    let cond_a = e12 <= 1.0 && 1.0 <= e14 && e14 <= e23 && e23 <= 3.0 * sf / 8.0;
    let outward = |p: usize| {
        parts[p]
            .iter()
            .filter(|&&v| g.neighbors(v).iter().any(|adj| label[adj.to] != p))
            .count()
    };
    let cond_b = outward(0) <= 1 && outward(1) <= 1;
    let unit_34 = g
        .edges()
        .iter()
        .filter(|ed| {
            let (x, y) = (label[ed.u], label[ed.v]);
            (x == 2 && y == 3) || (x == 3 && y == 2)
        })
        .all(|ed| ed.w <= 1.0);
    let cond_c = sf * sf / 64.0 <= e34 && e34 <= 3.0 * sf * sf / 64.0 && unit_34;
    Ok(ordered && cond_a && cond_b && cond_c)
}

/// Family and parameters of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceSpec {
    Path {
        n: usize,
    },
    PathEdges {
        m: usize,
    },
    Cycle {
        n: usize,
    },
    Clique {
        n: usize,
    },
    Gnp {
        n: usize,
        p: f64,
        max_weight: u32,
        #[serde(default)]
        seed: u64,
    },
    DisjointUnion {
        parts: Vec<InstanceSpec>,
    },
    Noc {
        n: usize,
        k: usize,
        case: u8,
    },
    Ovme {
        n: usize,
        k: usize,
        t: usize,
        case: OvmeCase,
        #[serde(default)]
        seed: u64,
    },
    TwoCliqueGadget {
        s: usize,
        cross: usize,
        #[serde(default)]
        seed: u64,
    },
    FourCliqueGadget {
        s: usize,
        e12: usize,
        e14: usize,
        e23: usize,
        e34: usize,
        #[serde(default)]
        seed: u64,
    },
    IndexGadget {
        big_n: usize,
        i: usize,
        j: usize,
        #[serde(default)]
        seed: u64,
    },
}

/// Ground truth emitted next to a generated graph; never read by solvers.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hidden {
    None,
    Noc {
        case: u8,
        n_effective: usize,
        cycle_lengths: Vec<usize>,
        paths: usize,
    },
    Ovme {
        case: OvmeCase,
        classes: Vec<usize>,
    },
    Bipartition {
        sides: Bipartition,
    },
    Parts {
        parts: [Vec<usize>; 4],
    },
    IndexGadget {
        parts: [Vec<usize>; 4],
        u: usize,
        v: usize,
        edge_uv: bool,
        prescribed_tree: String,
        closed_form: ClosedForm,
    },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: WeightedGraph,
    pub hidden: Hidden,
}

impl InstanceSpec {
    /// The same spec with every seed field (nested ones included) replaced.
    pub fn with_seed(&self, new_seed: u64) -> InstanceSpec {
        let mut out = self.clone();
        match &mut out {
            InstanceSpec::Gnp { seed, .. }
            | InstanceSpec::Ovme { seed, .. }
            | InstanceSpec::TwoCliqueGadget { seed, .. }
            | InstanceSpec::FourCliqueGadget { seed, .. }
            | InstanceSpec::IndexGadget { seed, .. } => *seed = new_seed,
            InstanceSpec::DisjointUnion { parts } => {
                for p in parts.iter_mut() {
                    *p = p.with_seed(new_seed);
                }
            }
            InstanceSpec::Path { .. }
            | InstanceSpec::PathEdges { .. }
            | InstanceSpec::Cycle { .. }
            | InstanceSpec::Clique { .. }
            | InstanceSpec::Noc { .. } => {}
        }
        out
    }

    pub fn generate(&self) -> Result<Generated> {
        let plain = |graph| {
            Ok(Generated {
                graph,
                hidden: Hidden::None,
            })
        };
        match self {
            InstanceSpec::Path { n } => plain(path_vertices(*n)?),
            InstanceSpec::PathEdges { m } => plain(path_edges(*m)?),
            InstanceSpec::Cycle { n } => plain(cycle(*n)?),
            InstanceSpec::Clique { n } => plain(clique(*n)?),
            InstanceSpec::Gnp { n, p, max_weight, seed } => plain(gen_gnp(*n, *p, *max_weight, *seed)?),
            InstanceSpec::DisjointUnion { parts } => {
                let graphs = parts
                    .iter()
                    .map(|p| Ok(p.generate()?.graph))
                    .collect::<Result<Vec<_>>>()?;
                plain(WeightedGraph::disjoint_union(&graphs))
            }
            InstanceSpec::Noc { n, k, case } => {
                let inst = gen_noc(*n, *k, *case)?;
                Ok(Generated {
                    graph: inst.graph,
                    hidden: Hidden::Noc {
                        case: *case,
                        n_effective: inst.n_effective,
                        cycle_lengths: inst.cycle_lengths,
                        paths: inst.paths,
                    },
                })
            }
            InstanceSpec::Ovme { n, k, t, case, seed } => {
                let inst = gen_ovme(*n, *k, *t, *case, *seed)?;
                Ok(Generated {
                    graph: inst.graph,
                    hidden: Hidden::Ovme {
                        case: *case,
                        classes: inst.classes,
                    },
                })
            }
            InstanceSpec::TwoCliqueGadget { s, cross, seed } => {
                let (graph, sides) = gen_two_clique_gadget(*s, *cross, *seed)?;
                Ok(Generated {
                    graph,
                    hidden: Hidden::Bipartition { sides },
                })
            }
            InstanceSpec::FourCliqueGadget {
                s,
                e12,
                e14,
                e23,
                e34,
                seed,
            } => {
                let (graph, parts) = gen_four_clique_gadget(*s, *e12, *e14, *e23, *e34, *seed)?;
                Ok(Generated {
                    graph,
                    hidden: Hidden::Parts { parts },
                })
            }
            InstanceSpec::IndexGadget { big_n, i, j, seed } => {
                let x = random_bits(*big_n, *seed);
                let gadget = gen_index_gadget(*big_n, &x, *i, *j)?;
                Ok(Generated {
                    hidden: Hidden::IndexGadget {
                        parts: gadget.parts.clone(),
                        u: gadget.u,
                        v: gadget.v,
                        edge_uv: gadget.edge_uv,
                        prescribed_tree: gadget.prescribed.to_string(),
                        closed_form: gadget.closed_form,
                    },
                    graph: gadget.graph,
                })
            }
        }
    }
}
