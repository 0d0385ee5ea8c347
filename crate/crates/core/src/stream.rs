//! Edge streams with arrival orders and pass counting, word metering, and
//! the single-pass pipeline: sparsify in-pass, cluster after the pass.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{read_raw_edge_list, Edge, WeightedGraph};
use crate::solver::{self, CostReport, CutFinder, LowerBound, Metrics};
use crate::sparsify::{self, SparsifierState, SparsifyConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamOrder {
    Natural,
    Shuffled(u64),
    /// Edges crossing the bipartition arrive after all others. The vector
    /// lists the vertices of one side.
    AdversarialCutLast(Vec<usize>),
}

enum Source {
    Buffered(Vec<Edge>),
    Once(Box<dyn Iterator<Item = Edge>>),
}

/// An edge sequence read front to back. Buffered sources can be rewound;
/// each rewind costs one more pass.
pub struct EdgeStream {
    n: usize,
    len: usize,
    source: Source,
    position: usize,
    passes_used: usize,
}

impl fmt::Debug for EdgeStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EdgeStream")
            .field("n", &self.n)
            .field("len", &self.len)
            .field("position", &self.position)
            .field("passes_used", &self.passes_used)
            .finish()
    }
}

impl EdgeStream {
    pub fn from_edges(n: usize, mut edges: Vec<Edge>, order: &StreamOrder) -> Result<Self> {
        match order {
            StreamOrder::Natural => {}
            StreamOrder::Shuffled(seed) => edges.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed)),
            StreamOrder::AdversarialCutLast(side) => {
                let mut in_a = vec![false; n];
                for &v in side {
                    if v >= n {
                        return Err(Error::arg(format!("bipartition vertex {v} out of range")));
                    }
                    in_a[v] = true;
                }
                let (inner, crossing): (Vec<Edge>, Vec<Edge>) = edges.into_iter().partition(|e| in_a[e.u] == in_a[e.v]);
                edges = inner;
                edges.extend(crossing);
            }
        }
        Ok(EdgeStream {
            n,
            len: edges.len(),
            source: Source::Buffered(edges),
            position: 0,
            passes_used: 1,
        })
    }

    pub fn from_graph(g: &WeightedGraph, order: &StreamOrder) -> Result<Self> {
        Self::from_edges(g.n(), g.edges().to_vec(), order)
    }

    /// Edges in file order, unmerged.
    pub fn from_file(path: impl AsRef<Path>, order: &StreamOrder) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let (n, edges) = read_raw_edge_list(file)?;
        Self::from_edges(n, edges, order)
    }

    /// A stream that can be read once. `len` is the declared edge count; the
    /// iterator ending early is an error.
    pub fn once<I>(n: usize, len: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = Edge>,
        I::IntoIter: 'static,
    {
        EdgeStream {
            n,
            len,
            source: Source::Once(Box::new(edges.into_iter())),
            position: 0,
            passes_used: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Declared number of edges per pass.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn passes_used(&self) -> usize {
        self.passes_used
    }

    pub fn is_rewindable(&self) -> bool {
        matches!(self.source, Source::Buffered(_))
    }

    /// Next edge of the current pass, `None` at the end of the pass.
    pub fn next_edge(&mut self) -> Result<Option<Edge>> {
        if self.position >= self.len {
            return Ok(None);
        }
        let edge = match &mut self.source {
            Source::Buffered(edges) => edges[self.position],
            Source::Once(iter) => iter.next().ok_or_else(|| {
                Error::Stream(format!(
                    "stream ended after {} of {} declared edges",
                    self.position, self.len
                ))
            })?,
        };
        if edge.u >= self.n || edge.v >= self.n || edge.u == edge.v || !(edge.w > 0.0 && edge.w.is_finite()) {
            return Err(Error::Stream(format!(
                "invalid edge ({}, {}, {}) at position {}",
                edge.u, edge.v, edge.w, self.position
            )));
        }
        self.position += 1;
        Ok(Some(edge))
    }

    pub fn rewind(&mut self) -> Result<()> {
        match self.source {
            Source::Buffered(_) => {
                self.position = 0;
                self.passes_used += 1;
                Ok(())
            }
            Source::Once(_) => Err(Error::Stream("this stream cannot be rewound".into())),
        }
    }
}

/// Words currently held and the peak ever held.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Meter {
    pub words_now: usize,
    pub words_peak: usize,
}

impl Meter {
    pub fn alloc(&mut self, words: usize) {
        self.words_now += words;
        self.words_peak = self.words_peak.max(self.words_now);
    }

    pub fn free(&mut self, words: usize) {
        debug_assert!(words <= self.words_now, "freeing more than held");
        self.words_now -= words.min(self.words_now);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub finder: CutFinder,
    pub sparsify: SparsifyConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamOutcome {
    /// Cost and certificate are measured on the sparsifier.
    pub report: CostReport,
    /// Cost of the same tree on the full input, when supplied.
    pub cost_full: Option<f64>,
    pub state: SparsifierState,
    #[serde(skip)]
    pub sparsifier: WeightedGraph,
}

/// One pass over `stream` building a sparsifier, then the recursive solver
/// on it. `reference` is the full graph, used only to report `cost_full`.
pub fn stream_hc(
    stream: &mut EdgeStream,
    cfg: &StreamConfig,
    reference: Option<&WeightedGraph>,
) -> Result<StreamOutcome> {
    if stream.passes_used() != 1 || stream.position() != 0 {
        return Err(Error::Stream("single-pass budget already spent on this stream".into()));
    }
    let start = Instant::now();
    let n = stream.n();
    let (h, state) = sparsify::stream_sparsify(stream, n, cfg.epsilon, cfg.seed, &cfg.sparsify)?;
    if stream.passes_used() != 1 || stream.position() != stream.len() {
        return Err(Error::Stream(
            "sparsification did not finish in exactly one pass".into(),
        ));
    }
    let (tree, cut_calls) = solver::recursive_with_stats(&h, cfg.beta, &cfg.finder)?;
    let cost = tree.cost_lca(&h)?;
    let lb = solver::lower_bound_balanced(&h, &cfg.finder)?;
    let lb = LowerBound {
        value: lb.value,
        certified: lb.certified && !state.sampled,
    };
    let cost_full = reference.map(|g| tree.cost_lca(g)).transpose()?;
    let metrics = Metrics {
        words_peak: state.words_peak,
        passes: stream.passes_used(),
        cut_calls: cut_calls + usize::from(n >= 3),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(StreamOutcome {
        report: solver::report(tree, cost, lb, metrics),
        cost_full,
        state,
        sparsifier: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_unit_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
    }

    fn drain(s: &mut EdgeStream) -> Vec<Edge> {
        let mut out = Vec::new();
        while let Some(e) = s.next_edge().unwrap() {
            out.push(e);
        }
        out
    }

    fn sorted(mut v: Vec<Edge>) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = v.drain(..).map(|e| (e.u, e.v)).collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn rewind_replays_the_same_multiset() {
        let g = triangle();
        let mut s = EdgeStream::from_graph(&g, &StreamOrder::Shuffled(5)).unwrap();
        let first = drain(&mut s);
        for _ in 0..3 {
            s.rewind().unwrap();
            assert_eq!(drain(&mut s), first);
        }
        assert_eq!(s.passes_used(), 4);
        assert_eq!(sorted(first), sorted(g.edges().to_vec()));
    }

    #[test]
    fn adversarial_order_puts_crossing_edges_last() {
        let g = triangle();
        let mut s = EdgeStream::from_graph(&g, &StreamOrder::AdversarialCutLast(vec![0, 1])).unwrap();
        let got: Vec<(usize, usize)> = drain(&mut s).into_iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(got, vec![(0, 1), (2, 3), (0, 2), (1, 2)]);
    }

    #[test]
    fn once_streams_cannot_rewind_or_run_short() {
        let edges = vec![Edge::new(0, 1, 1.0)];
        let mut s = EdgeStream::once(2, 2, edges);
        assert!(s.next_edge().unwrap().is_some());
        assert!(matches!(s.next_edge(), Err(Error::Stream(_))));
        assert!(matches!(s.rewind(), Err(Error::Stream(_))));
    }

    #[test]
    fn meter_tracks_peak() {
        let mut m = Meter::default();
        m.alloc(9);
        m.free(6);
        m.alloc(2);
        assert_eq!((m.words_now, m.words_peak), (5, 9));
    }

    #[test]
    fn stream_hc_matches_offline_when_sparsifier_is_identity() {
        let mut e = Vec::new();
        for u in 0..10 {
            for v in u + 1..10 {
                if (u * v) % 3 != 1 {
                    e.push((u, v));
                }
            }
        }
        let g = WeightedGraph::from_unit_edges(10, e).unwrap();
        let cfg = StreamConfig {
            epsilon: 0.2,
            beta: solver::DEFAULT_BETA,
            finder: CutFinder::exact(),
            sparsify: SparsifyConfig::default(),
            seed: 1,
        };
        let offline = solver::solve(&g, cfg.beta, &cfg.finder).unwrap();
        for order in [
            StreamOrder::Natural,
            StreamOrder::Shuffled(3),
            StreamOrder::AdversarialCutLast(vec![0, 1, 2]),
        ] {
            let mut s = EdgeStream::from_graph(&g, &order).unwrap();
            let out = stream_hc(&mut s, &cfg, Some(&g)).unwrap();
            assert_eq!(out.report.tree.to_string(), offline.tree.to_string());
            assert_eq!(out.cost_full, Some(offline.cost));
            assert_eq!(out.report.metrics.passes, 1);
            assert_eq!(out.report.metrics.words_peak, 3 * g.m());
            assert!(out.report.lower_bound_certified);
            assert!(stream_hc(&mut s, &cfg, None).is_err());
        }
    }
}
