//! Exponential-time ground truth: optimal trees by subset DP, exact
//! balanced minimum cuts, and an all-trees enumerator used to validate the DP.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{max_side_for, Cut, WeightedGraph};
use crate::tree::{HCTree, NodeId, TreeBuilder};

pub const ORACLE_CAP: usize = 16;
pub const BALANCED_CUT_CAP: usize = 20;
pub const ALL_TREES_CAP: usize = 8;

const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub value: f64,
    #[serde(serialize_with = "crate::tree::serialize_as_text")]
    pub tree: HCTree,
    /// Every root bipartition achieving `value`, each as `(side with vertex
    /// 0, other side)` with sorted sides.
    pub optimal_root_cuts: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Weight of edges inside every subset of a small vertex list, indexed by
/// bitmask over positions in that list.
pub(crate) struct SubsetWeights {
    pub inside: Vec<f64>,
}

impl SubsetWeights {
    pub fn new(g: &WeightedGraph, vertices: &[usize]) -> Self {
        let k = vertices.len();
        let mut pos = vec![usize::MAX; g.n()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        // row[i][j] = w(v_i, v_j) for j < i only
        let mut row = vec![vec![0.0; k]; k];
        for (i, &v) in vertices.iter().enumerate() {
            for adj in g.neighbors(v) {
                let j = pos[adj.to];
                if j != usize::MAX && j < i {
                    row[i][j] = adj.w;
                }
            }
        }
        let mut inside = vec![0.0; 1 << k];
        for s in 1usize..(1 << k) {
            let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
            let rest = s & !(1 << top);
            let mut add = 0.0;
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                add += row[top][j];
                r &= r - 1;
            }
            inside[s] = inside[rest] + add;
        }
        SubsetWeights { inside }
    }

    pub fn cut(&self, a: usize, b: usize) -> f64 {
        self.inside[a | b] - self.inside[a] - self.inside[b]
    }
}

fn members(mask: usize, vertices: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(vertices[m.trailing_zeros() as usize]);
        m &= m - 1;
    }
    out
}

/// Exact optimum of Dasgupta's cost by DP over vertex subsets.
pub fn brute_force_opt(g: &WeightedGraph) -> Result<OptResult> {
    brute_force_opt_capped(g, ORACLE_CAP)
}

pub fn brute_force_opt_capped(g: &WeightedGraph, cap: usize) -> Result<OptResult> {
    let n = g.n();
    if n == 0 {
        return Err(Error::arg("the optimum is undefined on an empty graph"));
    }
    if n > cap || n >= usize::BITS as usize {
        return Err(Error::TooLarge {
            size: n,
            cap,
            hint: "use the recursive solver with its lower-bound certificate instead",
        });
    }
    let vertices: Vec<usize> = (0..n).collect();
    let table = SubsetWeights::new(g, &vertices);
    let full = (1usize << n) - 1;
    let mut opt = vec![0.0f64; 1 << n];
    let mut choice = vec![0usize; 1 << n];
    for s in 1..=full {
        if s & (s - 1) == 0 {
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let size = s.count_ones() as f64;
        let mut best = f64::INFINITY;
        let mut best_a = 0;
        // A always holds the lowest bit, so each bipartition is seen once
        let mut sub = 0usize;
        loop {
            if sub != rest {
                let a = sub | low;
                let b = s ^ a;
                let val = table.cut(a, b) * size + opt[a] + opt[b];
                if val < best {
                    best = val;
                    best_a = a;
                }
            }
            sub = (sub.wrapping_sub(rest)) & rest;
            if sub == 0 {
                break;
            }
        }
        opt[s] = best;
        choice[s] = best_a;
    }

    let mut builder = TreeBuilder::new();
    let root = build(&mut builder, full, &choice);
    let tree = builder.finish(root)?;

    let mut optimal_root_cuts = Vec::new();
    if n >= 2 {
        let best = opt[full];
        let size = n as f64;
        let rest = full ^ 1;
        let mut sub = 0usize;
        loop {
            if sub != rest {
                let a = sub | 1;
                let b = full ^ a;
                let val = table.cut(a, b) * size + opt[a] + opt[b];
                if (val - best).abs() <= REL_TOL * best.abs().max(1.0) {
                    optimal_root_cuts.push((members(a, &vertices), members(b, &vertices)));
                }
            }
            sub = (sub.wrapping_sub(rest)) & rest;
            if sub == 0 {
                break;
            }
        }
    }
    let value = tree.cost_lca(g)?;
    Ok(OptResult {
        value,
        tree,
        optimal_root_cuts,
    })
}

fn build(b: &mut TreeBuilder, s: usize, choice: &[usize]) -> NodeId {
    if s & (s - 1) == 0 {
        return b.leaf(s.trailing_zeros() as usize);
    }
    let a = choice[s];
    let x = build(b, a, choice);
    let y = build(b, s ^ a, choice);
    b.join(x, y).expect("children exist")
}

/// True iff `expected` (in either orientation) is among the optimal root
/// cuts of `g`.
pub fn verify_first_split(g: &WeightedGraph, expected: (&[usize], &[usize])) -> Result<bool> {
    let n = g.n();
    let mut a = expected.0.to_vec();
    let mut b = expected.1.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut seen = vec![false; n];
    for &x in a.iter().chain(&b) {
        if x >= n || seen[x] {
            return Err(Error::arg("expected split must partition the vertex set"));
        }
        seen[x] = true;
    }
    if a.is_empty() || b.is_empty() || a.len() + b.len() != n {
        return Err(Error::arg(
            "expected split must partition the vertex set into two nonempty sides",
        ));
    }
    if a[0] != 0 {
        std::mem::swap(&mut a, &mut b);
    }
    let opt = brute_force_opt(g)?;
    Ok(opt.optimal_root_cuts.iter().any(|(x, y)| *x == a && *y == b))
}

/// Minimum-weight bipartition of `subset` whose larger side is at most
/// `(1 - beta)|subset|` (or as balanced as possible for tiny subsets), in
/// the subgraph induced by `subset`. Ties go to the smallest side-a
/// bitmask over positions in the sorted subset.
pub fn exact_balanced_min_cut(g: &WeightedGraph, subset: &[usize], beta: f64) -> Result<Cut> {
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::arg(format!("beta must lie in (0, 1/2], got {beta}")));
    }
    let mut vertices = subset.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    if vertices.len() != subset.len() {
        return Err(Error::arg("subset contains repeated vertices"));
    }
    if let Some(&v) = vertices.last() {
        if v >= g.n() {
            return Err(Error::arg(format!("vertex {v} out of range")));
        }
    }
    let k = vertices.len();
    if k <= 1 {
        return Err(Error::arg(format!("no balanced bipartition of a {k}-vertex set")));
    }
    if k > BALANCED_CUT_CAP {
        return Err(Error::TooLarge {
            size: k,
            cap: BALANCED_CUT_CAP,
            hint: "use a heuristic cut finder",
        });
    }
    let table = SubsetWeights::new(g, &vertices);
    let full = (1usize << k) - 1;
    let hi = max_side_for(k, beta) as u32;
    let lo = k as u32 - hi;
    let mut best = f64::INFINITY;
    let mut best_mask = 0;
    for mask in 1..full {
        let size = mask.count_ones();
        if size < lo || size > hi {
            continue;
        }
        let w = table.cut(mask, full ^ mask);
        if w < best {
            best = w;
            best_mask = mask;
        }
    }
    Ok(Cut {
        side_a: members(best_mask, &vertices),
        side_b: members(full ^ best_mask, &vertices),
        weight: best,
    })
}

/// Every binary tree on leaves `0..n`. There are `(2n-3)!!` of them.
pub fn all_binary_trees(n: usize) -> Result<Vec<HCTree>> {
    if n == 0 {
        return Err(Error::arg("no trees on zero leaves"));
    }
    if n > ALL_TREES_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: ALL_TREES_CAP,
            hint: "the enumerator only validates the DP at small sizes",
        });
    }
    let texts = shapes((1usize << n) - 1);
    texts.iter().map(|t| HCTree::parse(t)).collect()
}

fn shapes(s: usize) -> Vec<String> {
    if s & (s - 1) == 0 {
        return vec![s.trailing_zeros().to_string()];
    }
    let low = s & s.wrapping_neg();
    let rest = s ^ low;
    let mut out = Vec::new();
    let mut sub = 0usize;
    loop {
        if sub != rest {
            let a = sub | low;
            let left = shapes(a);
            let right = shapes(s ^ a);
            for l in &left {
                for r in &right {
                    out.push(format!("({l},{r})"));
                }
            }
        }
        sub = (sub.wrapping_sub(rest)) & rest;
        if sub == 0 {
            break;
        }
    }
    out
}

/// Minimum of `cost_lca` over every binary tree; independent of the DP.
pub fn exhaustive_opt(g: &WeightedGraph) -> Result<f64> {
    let mut best = f64::INFINITY;
    for t in all_binary_trees(g.n())? {
        best = best.min(t.cost_lca(g)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn clique(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        WeightedGraph::from_unit_edges(n, e).unwrap()
    }

    fn cycle(n: usize) -> WeightedGraph {
        WeightedGraph::from_unit_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn opt_examples() {
        let k2 = WeightedGraph::from_edges(2, [Edge::new(0, 1, 2.5)]).unwrap();
        assert_eq!(brute_force_opt(&k2).unwrap().value, 5.0);
        let c4 = brute_force_opt(&cycle(4)).unwrap();
        assert_eq!(c4.value, 12.0);
        assert_eq!(c4.tree.cost_lca(&cycle(4)).unwrap(), 12.0);
        assert_eq!(brute_force_opt(&clique(4)).unwrap().value, 20.0);
    }

    #[test]
    fn opt_errors() {
        assert!(matches!(
            brute_force_opt(&WeightedGraph::empty(0)),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            brute_force_opt(&WeightedGraph::empty(17)),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(brute_force_opt(&WeightedGraph::empty(1)).unwrap().value, 0.0);
    }

    #[test]
    fn all_optimal_root_cuts_are_listed() {
        // every tree of a clique has the same cost, so all 7 root splits tie
        let r = brute_force_opt(&clique(4)).unwrap();
        assert_eq!(r.optimal_root_cuts.len(), 7);
        let r = brute_force_opt(&cycle(4)).unwrap();
        assert_eq!(
            r.optimal_root_cuts,
            vec![(vec![0, 1], vec![2, 3]), (vec![0, 3], vec![1, 2])]
        );
    }

    #[test]
    fn balanced_cut_examples() {
        let third = 1.0 / 3.0;
        let k4 = clique(4);
        assert_eq!(exact_balanced_min_cut(&k4, &[0, 1, 2, 3], third).unwrap().weight, 4.0);

        let mut e = vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)];
        e.sort();
        let bar = WeightedGraph::from_unit_edges(6, e).unwrap();
        let cut = exact_balanced_min_cut(&bar, &[0, 1, 2, 3, 4, 5], third).unwrap();
        assert_eq!(cut.weight, 1.0);
        assert_eq!(cut.side_a, vec![0, 1, 2]);

        let empty = WeightedGraph::empty(4);
        let cut = exact_balanced_min_cut(&empty, &[0, 1, 2, 3], third).unwrap();
        assert_eq!(cut.weight, 0.0);
        assert_eq!(cut.side_a, vec![0, 1]);

        assert!(matches!(
            exact_balanced_min_cut(&k4, &[2], third),
            Err(Error::Argument(_))
        ));
        assert!(exact_balanced_min_cut(&k4, &[0, 1], 0.6).is_err());
    }

    #[test]
    fn balanced_cut_on_induced_subgraph() {
        // edges to vertices outside the subset do not count
        let k4 = clique(4);
        let cut = exact_balanced_min_cut(&k4, &[1, 3], 1.0 / 3.0).unwrap();
        assert_eq!((cut.side_a, cut.side_b, cut.weight), (vec![1], vec![3], 1.0));
        let cut = exact_balanced_min_cut(&k4, &[0, 2, 3], 0.5).unwrap();
        assert_eq!(cut.weight, 2.0);
    }

    #[test]
    fn first_split_examples() {
        let mut e = Vec::new();
        for base in [0, 4] {
            for u in 0..4 {
                for v in u + 1..4 {
                    e.push((base + u, base + v));
                }
            }
        }
        let disjoint = WeightedGraph::from_unit_edges(8, e.clone()).unwrap();
        e.push((0, 4));
        e.push((1, 5));
        let joined = WeightedGraph::from_unit_edges(8, e).unwrap();
        let split: (&[usize], &[usize]) = (&[0, 1, 2, 3], &[4, 5, 6, 7]);
        assert!(verify_first_split(&joined, split).unwrap());
        assert!(verify_first_split(&disjoint, split).unwrap());
        assert!(verify_first_split(&joined, (&[4, 5, 6, 7], &[0, 1, 2, 3])).unwrap());
        assert!(verify_first_split(&clique(4), (&[0], &[1, 2, 3])).unwrap());
        assert!(!verify_first_split(&cycle(4), (&[0], &[1, 2, 3])).unwrap());
        assert!(!verify_first_split(&cycle(4), (&[0, 2], &[1, 3])).unwrap());

        let tri = WeightedGraph::from_unit_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(verify_first_split(&tri, (&[0, 1, 2], &[3, 4, 5])).unwrap());
        assert!(verify_first_split(&tri, (&[0, 1], &[3, 4, 5])).is_err());
    }

    #[test]
    fn tree_counts_are_double_factorials() {
        let mut expected = 1;
        for n in 1..=7 {
            if n >= 2 {
                expected *= 2 * n - 3;
            }
            assert_eq!(all_binary_trees(n).unwrap().len(), expected);
        }
    }

    #[test]
    fn dp_matches_enumeration_on_small_graphs() {
        let petersen_like = WeightedGraph::from_edges(
            6,
            [
                Edge::new(0, 1, 2.0),
                Edge::new(1, 2, 1.0),
                Edge::new(2, 3, 3.0),
                Edge::new(3, 4, 1.0),
                Edge::new(4, 5, 2.0),
                Edge::new(5, 0, 1.0),
                Edge::new(0, 3, 1.0),
            ],
        )
        .unwrap();
        for g in [clique(5), cycle(6), petersen_like] {
            assert_eq!(brute_force_opt(&g).unwrap().value, exhaustive_opt(&g).unwrap());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn graph(n: usize, raw: &[(usize, usize, u32)]) -> WeightedGraph {
            WeightedGraph::from_edges(
                n,
                raw.iter()
                    .filter(|(u, v, _)| u % n != v % n)
                    .map(|&(u, v, w)| Edge::new(u % n, v % n, w as f64)),
            )
            .unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn monotone_under_bipartition(n in 2usize..10, raw in proptest::collection::vec((0usize..10, 0usize..10, 1u32..4), 0..30), mask in any::<u32>()) {
                let g = graph(n, &raw);
                let a: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let b: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 0).collect();
                prop_assume!(!a.is_empty() && !b.is_empty());
                let whole = brute_force_opt(&g).unwrap().value;
                let pa = brute_force_opt(&g.induced(&a).unwrap()).unwrap().value;
                let pb = brute_force_opt(&g.induced(&b).unwrap()).unwrap().value;
                prop_assert!(pa + pb <= whole);
            }

            #[test]
            fn additive_over_disjoint_unions(na in 1usize..7, nb in 1usize..7, ra in proptest::collection::vec((0usize..7, 0usize..7, 1u32..4), 0..15), rb in proptest::collection::vec((0usize..7, 0usize..7, 1u32..4), 0..15)) {
                let a = graph(na, &ra);
                let b = graph(nb, &rb);
                let u = WeightedGraph::disjoint_union(&[a.clone(), b.clone()]);
                let sum = brute_force_opt(&a).unwrap().value + brute_force_opt(&b).unwrap().value;
                prop_assert_eq!(brute_force_opt(&u).unwrap().value, sum);
            }

            #[test]
            fn unit_opt_at_most_m_times_n(n in 1usize..11, raw in proptest::collection::vec((0usize..11, 0usize..11), 0..30)) {
                let g = WeightedGraph::from_unit_edges(n, raw.iter().filter(|(u, v)| u % n != v % n).map(|&(u, v)| (u % n, v % n))).unwrap();
                prop_assert!(brute_force_opt(&g).unwrap().value <= g.total_weight() * n as f64);
            }

            #[test]
            fn returned_tree_attains_value(n in 1usize..9, raw in proptest::collection::vec((0usize..9, 0usize..9, 1u32..4), 0..20)) {
                let g = graph(n, &raw);
                let r = brute_force_opt(&g).unwrap();
                prop_assert_eq!(r.tree.cost_lca(&g).unwrap(), r.value);
                prop_assert_eq!(r.tree.cost_cuts(&g).unwrap(), r.value);
            }
        }
    }

    #[test]
    fn path_optimum_is_nondecreasing_and_superadditive() {
        let path = |m: usize| WeightedGraph::from_unit_edges(m, (1..m).map(|i| (i - 1, i))).unwrap();
        let values: Vec<f64> = (1..=12).map(|m| brute_force_opt(&path(m)).unwrap().value).collect();
        for w in values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for a in 1..=6 {
            for b in 1..=6 {
                assert!(values[a - 1] + values[b - 1] <= values[a + b - 1]);
            }
        }
    }
}
