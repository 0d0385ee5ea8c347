//! Weighted undirected graphs on dense vertex ids `0..n`, cuts, and the
//! edge-list text format shared by every tool in this workspace.
//!
//! File format: a header line `<n> <m>` followed by `m` lines `<u> <v> <w>`.
//! Lines starting with `#` (after leading whitespace) and blank lines are
//! ignored. Parallel edges are merged by summing their weights.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Edge { u, v, w }
    }
}

/// Adjacency entry: neighbor, weight and the index of the edge in
/// [`WeightedGraph::edges`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adj {
    pub to: usize,
    pub w: f64,
    pub edge: usize,
}

/// Immutable weighted graph. Edges are stored once with `u < v`, sorted
/// lexicographically, with parallel input edges merged.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Adj>>,
    total_weight: f64,
}

impl WeightedGraph {
    /// Builds a graph from raw edges, validating ids and weights and merging
    /// parallel edges.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in edges {
            check_edge(n, &e).map_err(Error::Argument)?;
            let key = (e.u.min(e.v), e.u.max(e.v));
            *merged.entry(key).or_insert(0.0) += e.w;
        }
        Ok(Self::from_sorted_unique(
            n,
            merged.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect(),
        ))
    }

    pub fn from_unit_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, edges.into_iter().map(|(u, v)| Edge::new(u, v, 1.0)))
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, Vec::new())
    }

    // edges must already be validated, canonical (u < v), sorted and unique
    fn from_sorted_unique(n: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut total_weight = 0.0;
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push(Adj {
                to: e.v,
                w: e.w,
                edge: i,
            });
            adjacency[e.v].push(Adj {
                to: e.u,
                w: e.w,
                edge: i,
            });
            total_weight += e.w;
        }
        WeightedGraph {
            n,
            edges,
            adjacency,
            total_weight,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[Adj] {
        &self.adjacency[v]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|a| a.w).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).fold(0.0, f64::max)
    }

    /// Weight of the edge `{u, v}`, zero when absent.
    pub fn weight_between(&self, u: usize, v: usize) -> f64 {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a]
            .iter()
            .find(|adj| adj.to == b)
            .map_or(0.0, |adj| adj.w)
    }

    /// Returns a copy with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::arg(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self::from_sorted_unique(
            self.n,
            self.edges.iter().map(|e| Edge::new(e.u, e.v, e.w * factor)).collect(),
        ))
    }

    /// Subgraph induced by `vertices`, relabelled so that `vertices[i]`
    /// becomes `i`. Duplicate or out-of-range ids are rejected.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(Error::arg(format!("vertex {v} out of range (n = {})", self.n)));
            }
            if local[v] != usize::MAX {
                return Err(Error::arg(format!("vertex {v} listed twice")));
            }
            local[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for a in &self.adjacency[v] {
                let j = local[a.to];
                if j != usize::MAX && i < j {
                    edges.push(Edge::new(i, j, a.w));
                }
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        Ok(Self::from_sorted_unique(vertices.len(), edges))
    }

    /// Connected components, each sorted ascending, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            stack.push(s);
            let mut comp = Vec::new();
            while let Some(x) = stack.pop() {
                comp.push(x);
                for a in &self.adjacency[x] {
                    if !seen[a.to] {
                        seen[a.to] = true;
                        stack.push(a.to);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Vertex-disjoint union; vertices of `graphs[i]` are offset by the sizes
    /// of the preceding graphs.
    pub fn disjoint_union(graphs: &[WeightedGraph]) -> Self {
        let mut offset = 0;
        let mut edges = Vec::new();
        for g in graphs {
            edges.extend(g.edges.iter().map(|e| Edge::new(e.u + offset, e.v + offset, e.w)));
            offset += g.n;
        }
        Self::from_sorted_unique(offset, edges)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::arg("permutation length differs from vertex count"));
        }
        Self::from_edges(self.n, self.edges.iter().map(|e| Edge::new(perm[e.u], perm[e.v], e.w)))
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn read_edge_list<R: Read>(reader: R) -> Result<Self> {
        let (n, edges) = read_raw_edge_list(reader)?;
        Self::from_edges(n, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(file)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(16 * (self.edges.len() + 1));
        let _ = writeln!(s, "{} {}", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn check_edge(n: usize, e: &Edge) -> std::result::Result<(), String> {
    if e.u >= n || e.v >= n {
        return Err(format!(
            "vertex id out of range in edge ({}, {}) with n = {n}",
            e.u, e.v
        ));
    }
    if e.u == e.v {
        return Err(format!("self-loop on vertex {}", e.u));
    }
    if !(e.w > 0.0 && e.w.is_finite()) {
        return Err(format!(
            "nonpositive or non-finite weight {} on edge ({}, {})",
            e.w, e.u, e.v
        ));
    }
    Ok(())
}

/// Parses the edge-list format without merging parallel edges, returning the
/// declared vertex count and the edges in file order.
pub fn read_raw_edge_list<R: Read>(reader: R) -> Result<(usize, Vec<Edge>)> {
    let reader = BufReader::new(reader);
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(parse_err(format!("expected header \"<n> <m>\", found {trimmed:?}")));
                }
                let n = fields[0]
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("bad vertex count {:?}", fields[0])))?;
                let m = fields[1]
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("bad edge count {:?}", fields[1])))?;
                header = Some((n, m));
                edges.reserve(m);
            }
            Some((n, m)) => {
                if fields.len() != 3 {
                    return Err(parse_err(format!("expected \"<u> <v> <w>\", found {trimmed:?}")));
                }
                if edges.len() == m {
                    return Err(parse_err(format!("more edge lines than the declared {m}")));
                }
                let u = fields[0]
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("bad vertex id {:?}", fields[0])))?;
                let v = fields[1]
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("bad vertex id {:?}", fields[1])))?;
                let w = fields[2]
                    .parse::<f64>()
                    .map_err(|_| parse_err(format!("bad weight {:?}", fields[2])))?;
                let e = Edge::new(u, v, w);
                check_edge(n, &e).map_err(parse_err)?;
                edges.push(e);
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(Error::Parse {
            line: 1,
            msg: "missing header line".into(),
        });
    };
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("declared {m} edges but found {}", edges.len()),
        });
    }
    Ok((n, edges))
}

/// A bipartition of a vertex subset with its crossing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    pub weight: f64,
}

impl Cut {
    /// Builds a cut, computing its weight in `g`. Sides are sorted.
    pub fn new(g: &WeightedGraph, mut side_a: Vec<usize>, mut side_b: Vec<usize>) -> Result<Self> {
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::arg("both sides of a cut must be nonempty"));
        }
        side_a.sort_unstable();
        side_b.sort_unstable();
        let weight = cut_weight(g, &side_a, &side_b)?;
        Ok(Cut { side_a, side_b, weight })
    }

    pub fn smaller_side_len(&self) -> usize {
        self.side_a.len().min(self.side_b.len())
    }

    pub fn len(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_balanced(&self, beta: f64) -> bool {
        is_balanced_split(self.side_a.len(), self.side_b.len(), beta)
    }
}

/// `max(a, b) <= (1 - beta) * (a + b)`, with a small tolerance for the
/// floating-point product.
pub fn is_balanced_split(a: usize, b: usize, beta: f64) -> bool {
    (a.max(b) as f64) <= (1.0 - beta) * (a + b) as f64 + 1e-9
}

/// Largest side size admissible for a `beta`-balanced split of `k` vertices.
/// When no split meets the bound (tiny `k`, `beta` near 1/2) the most
/// balanced split size `ceil(k / 2)` is returned instead.
pub fn max_side_for(k: usize, beta: f64) -> usize {
    let strict = ((1.0 - beta) * k as f64 + 1e-9).floor() as usize;
    strict.max(k.div_ceil(2))
}

/// Sum of `w(e)` over edges with one endpoint in `a` and the other in `b`.
pub fn cut_weight(g: &WeightedGraph, a: &[usize], b: &[usize]) -> Result<f64> {
    let mut side = vec![0u8; g.n()];
    for &x in a {
        if x >= g.n() {
            return Err(Error::arg(format!("vertex {x} out of range")));
        }
        side[x] = 1;
    }
    for &x in b {
        if x >= g.n() {
            return Err(Error::arg(format!("vertex {x} out of range")));
        }
        if side[x] == 1 {
            return Err(Error::arg(format!("vertex {x} appears on both sides")));
        }
        side[x] = 2;
    }
    let (small, tag, other) = if a.len() <= b.len() { (a, 1, 2) } else { (b, 2, 1) };
    let mut total = 0.0;
    for &x in small {
        debug_assert_eq!(side[x], tag);
        total += g
            .neighbors(x)
            .iter()
            .filter(|adj| side[adj.to] == other)
            .map(|adj| adj.w)
            .sum::<f64>();
    }
    Ok(total)
}

/// Weight of the global cut `(S, V \ S)` given a membership mask.
pub fn boundary_weight(g: &WeightedGraph, in_set: &[bool]) -> f64 {
    g.edges()
        .iter()
        .filter(|e| in_set[e.u] != in_set[e.v])
        .map(|e| e.w)
        .sum()
}

/// Total weight of edges with both endpoints in the set.
pub fn inside_weight(g: &WeightedGraph, in_set: &[bool]) -> f64 {
    g.edges()
        .iter()
        .filter(|e| in_set[e.u] && in_set[e.v])
        .map(|e| e.w)
        .sum()
}
