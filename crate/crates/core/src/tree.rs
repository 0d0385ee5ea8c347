//! Hierarchical clustering trees and Dasgupta's cost.
//!
//! A tree is stored as an arena of nodes. Leaves carry vertex ids and the
//! leaves of a valid tree are exactly `0..n`. The text form is
//! `leaf = id`, `internal = '(' child (',' child)+ ')'`, e.g. `((0,1),(2,3))`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{max_side_for, WeightedGraph};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(usize),
    Internal(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub leaf_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HCTree {
    nodes: Vec<Node>,
    root: NodeId,
}

/// Incremental construction of an [`HCTree`] bottom-up.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, vertex: usize) -> NodeId {
        self.nodes.push(Node {
            kind: NodeKind::Leaf(vertex),
            leaf_count: 1,
        });
        self.nodes.len() - 1
    }

    pub fn internal(&mut self, children: Vec<NodeId>) -> Result<NodeId> {
        if children.len() < 2 {
            return Err(Error::Structure(format!(
                "internal node needs at least two children, got {}",
                children.len()
            )));
        }
        let mut leaf_count = 0;
        for &c in &children {
            let node = self
                .nodes
                .get(c)
                .ok_or_else(|| Error::Structure(format!("unknown child node {c}")))?;
            leaf_count += node.leaf_count;
        }
        self.nodes.push(Node {
            kind: NodeKind::Internal(children),
            leaf_count,
        });
        Ok(self.nodes.len() - 1)
    }

    /// Joins two subtrees under a fresh binary node.
    pub fn join(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.internal(vec![a, b])
    }

    /// Builds a balanced binary tree over `vertices` (halving recursively).
    pub fn balanced(&mut self, vertices: &[usize]) -> Result<NodeId> {
        match vertices.len() {
            0 => Err(Error::Structure("cannot build a tree over no vertices".into())),
            1 => Ok(self.leaf(vertices[0])),
            k => {
                let (l, r) = vertices.split_at(k / 2);
                let a = self.balanced(l)?;
                let b = self.balanced(r)?;
                self.join(a, b)
            }
        }
    }

    pub fn finish(self, root: NodeId) -> Result<HCTree> {
        HCTree::from_arena(self.nodes, root)
    }
}

impl HCTree {
    /// Validates an arena: every node reachable from `root` exactly once and
    /// the leaves are exactly `0..leaf_count(root)`. Unreachable nodes are
    /// dropped.
    pub fn from_arena(nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::Structure(format!("root {root} not in arena")));
        }
        let mut visited = vec![false; nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if visited[id] {
                return Err(Error::Structure(format!("node {id} reachable twice")));
            }
            visited[id] = true;
            order.push(id);
            if let NodeKind::Internal(ch) = &nodes[id].kind {
                if ch.len() < 2 {
                    return Err(Error::Structure(format!("node {id} has fewer than two children")));
                }
                for &c in ch {
                    if c >= nodes.len() {
                        return Err(Error::Structure(format!("child {c} not in arena")));
                    }
                    stack.push(c);
                }
            }
        }
        // compact into preorder ids
        let mut remap = vec![usize::MAX; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut compact: Vec<Node> = order
            .iter()
            .map(|&old| {
                let kind = match &nodes[old].kind {
                    NodeKind::Leaf(v) => NodeKind::Leaf(*v),
                    NodeKind::Internal(ch) => NodeKind::Internal(ch.iter().map(|&c| remap[c]).collect()),
                };
                Node { kind, leaf_count: 0 }
            })
            .collect();
        for id in (0..compact.len()).rev() {
            let count = match &compact[id].kind {
                NodeKind::Leaf(_) => 1,
                NodeKind::Internal(ch) => ch.iter().map(|&c| compact[c].leaf_count).sum(),
            };
            compact[id].leaf_count = count;
        }
        let n = compact[0].leaf_count;
        let mut seen = vec![false; n];
        for node in &compact {
            if let NodeKind::Leaf(v) = node.kind {
                if v >= n || seen[v] {
                    return Err(Error::Structure(format!(
                        "leaves must be exactly 0..{n}; found {v} out of range or repeated"
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(HCTree {
            nodes: compact,
            root: 0,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            bytes: text.as_bytes(),
            pos: 0,
            builder: TreeBuilder::new(),
        };
        let root = p.node()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.error("trailing input"));
        }
        p.builder.finish(root)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Number of leaves (= vertex count of the graph it clusters).
    pub fn n(&self) -> usize {
        self.nodes[self.root].leaf_count
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.nodes[id].kind {
            NodeKind::Leaf(_) => &[],
            NodeKind::Internal(ch) => ch,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|node| match &node.kind {
            NodeKind::Leaf(_) => true,
            NodeKind::Internal(ch) => ch.len() == 2,
        })
    }

    fn require_binary(&self, op: &str) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::Shape(format!("{op} requires a binary tree; binarize first")))
        }
    }

    fn require_leaves_match(&self, g: &WeightedGraph) -> Result<()> {
        if self.n() != g.n() {
            return Err(Error::Structure(format!(
                "tree has {} leaves but the graph has {} vertices",
                self.n(),
                g.n()
            )));
        }
        Ok(())
    }

    /// Leaf vertex ids under `id`, in left-to-right order.
    pub fn leaves_under(&self, id: NodeId) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[id].leaf_count);
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match &self.nodes[x].kind {
                NodeKind::Leaf(v) => out.push(*v),
                NodeKind::Internal(ch) => stack.extend(ch.iter().rev()),
            }
        }
        out
    }

    /// Internal nodes in post-order (children before parents).
    pub fn internal_postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if let NodeKind::Internal(ch) = &self.nodes[x].kind {
                if expanded {
                    out.push(x);
                } else {
                    stack.push((x, true));
                    for &c in ch.iter().rev() {
                        stack.push((c, false));
                    }
                }
            }
        }
        out
    }

    /// `(A, B)` for every binary internal node with `|A| <= |B|`; when the
    /// sizes tie, `A` is the side holding the smaller minimum vertex id.
    pub fn cuts(&self) -> Result<Vec<TreeCut>> {
        self.require_binary("cuts")?;
        Ok(self
            .internal_postorder()
            .into_iter()
            .map(|id| {
                let ch = self.children(id);
                let mut a = self.leaves_under(ch[0]);
                let mut b = self.leaves_under(ch[1]);
                a.sort_unstable();
                b.sort_unstable();
                let swap = a.len() > b.len() || (a.len() == b.len() && a[0] > b[0]);
                if swap {
                    std::mem::swap(&mut a, &mut b);
                }
                TreeCut {
                    node: id,
                    small_side: a,
                    large_side: b,
                }
            })
            .collect())
    }

    /// Dasgupta cost `sum_e w(e) * |leaves(lca(u, v))|`. Accepts non-binary
    /// trees.
    pub fn cost_lca(&self, g: &WeightedGraph) -> Result<f64> {
        self.require_leaves_match(g)?;
        let lca = LcaIndex::new(self);
        Ok(g.edges()
            .iter()
            .map(|e| e.w * self.nodes[lca.lca(e.u, e.v)].leaf_count as f64)
            .sum())
    }

    /// Cost as `sum over internal nodes of w(A, B) * |A ∪ B|`; binary trees
    /// only.
    pub fn cost_cuts(&self, g: &WeightedGraph) -> Result<f64> {
        self.require_leaves_match(g)?;
        self.require_binary("cost_cuts")?;
        let mut side = vec![0u8; g.n()];
        let mut total = 0.0;
        for id in self.internal_postorder() {
            let ch = self.children(id);
            let a = self.leaves_under(ch[0]);
            let b = self.leaves_under(ch[1]);
            for &x in &a {
                side[x] = 1;
            }
            for &x in &b {
                side[x] = 2;
            }
            let crossing: f64 = a
                .iter()
                .flat_map(|&x| g.neighbors(x))
                .filter(|adj| side[adj.to] == 2)
                .map(|adj| adj.w)
                .sum();
            total += crossing * (a.len() + b.len()) as f64;
            for &x in a.iter().chain(&b) {
                side[x] = 0;
            }
        }
        Ok(total)
    }

    /// `sum over internal nodes of 1/2 (w(A, V\A) + w(B, V\B)) * |A ∪ B|`
    /// with global cut weights taken in `g`.
    pub fn w_functional(&self, g: &WeightedGraph) -> Result<f64> {
        self.require_leaves_match(g)?;
        self.require_binary("w_functional")?;
        let mut mark = vec![false; g.n()];
        let mut boundary = |set: &[usize]| -> f64 {
            for &x in set {
                mark[x] = true;
            }
            let w: f64 = set
                .iter()
                .flat_map(|&x| g.neighbors(x))
                .filter(|adj| !mark[adj.to])
                .map(|adj| adj.w)
                .sum();
            for &x in set {
                mark[x] = false;
            }
            w
        };
        let mut total = 0.0;
        for id in self.internal_postorder() {
            let ch = self.children(id);
            let a = self.leaves_under(ch[0]);
            let b = self.leaves_under(ch[1]);
            total += 0.5 * (boundary(&a) + boundary(&b)) * (a.len() + b.len()) as f64;
        }
        Ok(total)
    }

    /// True iff every internal node splits with `max(|A|,|B|) <= (1-beta)|A ∪ B|`.
    pub fn is_beta_balanced(&self, beta: f64) -> Result<bool> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::arg(format!("beta must lie in (0, 1), got {beta}")));
        }
        self.require_binary("is_beta_balanced")?;
        Ok(self.internal_postorder().into_iter().all(|id| {
            let ch = self.children(id);
            let a = self.nodes[ch[0]].leaf_count;
            let b = self.nodes[ch[1]].leaf_count;
            crate::graph::is_balanced_split(a, b, beta)
        }))
    }

    /// Left-combs every multiway node: children `(c1, ..., ck)` become
    /// `((..(c1, c2), ..), ck)`. Binary trees come back unchanged.
    pub fn binarize(&self) -> HCTree {
        let mut b = TreeBuilder::new();
        let mut mapped = vec![usize::MAX; self.nodes.len()];
        let mut stack = vec![(self.root, false)];
        while let Some((x, expanded)) = stack.pop() {
            match &self.nodes[x].kind {
                NodeKind::Leaf(v) => mapped[x] = b.leaf(*v),
                NodeKind::Internal(ch) if expanded => {
                    let mut acc = mapped[ch[0]];
                    for &c in &ch[1..] {
                        acc = b.join(acc, mapped[c]).expect("children already built");
                    }
                    mapped[x] = acc;
                }
                NodeKind::Internal(ch) => {
                    stack.push((x, true));
                    for &c in ch.iter().rev() {
                        stack.push((c, false));
                    }
                }
            }
        }
        b.finish(mapped[self.root]).expect("binarize preserves leaves")
    }

    /// Uniformly random split sizes at every node; always binary.
    pub fn random_binary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HCTree> {
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        let mut b = TreeBuilder::new();
        let root = random_split(&mut b, &vertices, rng, &|k, rng: &mut R| rng.gen_range(1..k))?;
        b.finish(root)
    }

    /// Random binary tree whose every split is `beta`-balanced (or as
    /// balanced as possible when `beta` cannot be met at that size).
    pub fn random_balanced<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Result<HCTree> {
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        let mut b = TreeBuilder::new();
        let root = random_split(&mut b, &vertices, rng, &|k, rng: &mut R| {
            let hi = max_side_for(k, beta);
            rng.gen_range(k - hi..=hi)
        })?;
        b.finish(root)
    }
}

fn random_split<R: Rng + ?Sized>(
    b: &mut TreeBuilder,
    vertices: &[usize],
    rng: &mut R,
    pick: &dyn Fn(usize, &mut R) -> usize,
) -> Result<NodeId> {
    match vertices.len() {
        0 => Err(Error::Structure("cannot build a tree over no vertices".into())),
        1 => Ok(b.leaf(vertices[0])),
        k => {
            let at = pick(k, rng);
            let (l, r) = vertices.split_at(at);
            let x = random_split(b, l, rng, pick)?;
            let y = random_split(b, r, rng, pick)?;
            b.join(x, y)
        }
    }
}

/// Serde helper writing a tree in its text form.
pub fn serialize_as_text<S: serde::Serializer>(t: &HCTree, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(t)
}

/// The cut associated with a binary internal node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCut {
    pub node: NodeId,
    pub small_side: Vec<usize>,
    pub large_side: Vec<usize>,
}

// Binary lifting over parent pointers.
struct LcaIndex {
    leaf_of: Vec<NodeId>,
    depth: Vec<u32>,
    up: Vec<Vec<NodeId>>,
}

impl LcaIndex {
    fn new(t: &HCTree) -> Self {
        let len = t.nodes.len();
        let mut parent = vec![t.root; len];
        let mut depth = vec![0u32; len];
        let mut leaf_of = vec![0; t.n()];
        let mut stack = vec![t.root];
        while let Some(x) = stack.pop() {
            match &t.nodes[x].kind {
                NodeKind::Leaf(v) => leaf_of[*v] = x,
                NodeKind::Internal(ch) => {
                    for &c in ch {
                        parent[c] = x;
                        depth[c] = depth[x] + 1;
                        stack.push(c);
                    }
                }
            }
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let levels = (u32::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut up = vec![parent];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next = (0..len).map(|x| prev[prev[x]]).collect();
            up.push(next);
        }
        LcaIndex { leaf_of, depth, up }
    }

    fn lca(&self, u: usize, v: usize) -> NodeId {
        let (mut a, mut b) = (self.leaf_of[u], self.leaf_of[v]);
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[k][a];
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][a] != self.up[k][b] {
                a = self.up[k][a];
                b = self.up[k][b];
            }
        }
        self.up[0][a]
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    builder: TreeBuilder,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            line: 1,
            msg: format!("tree text at byte {}: {msg}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    // Iterative so that deep combs do not exhaust the stack.
    fn node(&mut self) -> Result<NodeId> {
        let mut open: Vec<Vec<NodeId>> = Vec::new();
        loop {
            self.skip_ws();
            let done = match self.bytes.get(self.pos) {
                Some(b'(') => {
                    self.pos += 1;
                    open.push(Vec::new());
                    continue;
                }
                Some(c) if c.is_ascii_digit() => {
                    let start = self.pos;
                    while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
                    let v = text.parse::<usize>().map_err(|_| self.error("vertex id overflow"))?;
                    self.builder.leaf(v)
                }
                _ => return Err(self.error("expected '(' or a vertex id")),
            };
            let mut finished = done;
            loop {
                let Some(children) = open.last_mut() else {
                    return Ok(finished);
                };
                children.push(finished);
                self.skip_ws();
                match self.bytes.get(self.pos) {
                    Some(b',') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        let children = open.pop().expect("nonempty");
                        if children.len() < 2 {
                            return Err(self.error("internal node needs at least two children"));
                        }
                        finished = self.builder.internal(children)?;
                    }
                    _ => return Err(self.error("expected ',' or ')'")),
                }
            }
        }
    }
}

impl fmt::Display for HCTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        enum Tok {
            Node(NodeId),
            Text(&'static str),
        }
        let mut stack = vec![Tok::Node(self.root)];
        while let Some(tok) = stack.pop() {
            match tok {
                Tok::Text(s) => f.write_str(s)?,
                Tok::Node(id) => match &self.nodes[id].kind {
                    NodeKind::Leaf(v) => write!(f, "{v}")?,
                    NodeKind::Internal(ch) => {
                        f.write_str("(")?;
                        stack.push(Tok::Text(")"));
                        for (i, &c) in ch.iter().enumerate().rev() {
                            stack.push(Tok::Node(c));
                            if i > 0 {
                                stack.push(Tok::Text(","));
                            }
                        }
                    }
                },
            }
        }
        Ok(())
    }
}
