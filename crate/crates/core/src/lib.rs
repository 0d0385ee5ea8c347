//! Hierarchical clustering under Dasgupta's cost: graphs, trees, exact
//! oracles, cut sparsification, a recursive solver and streaming harness.

pub mod error;
pub mod expansion;
pub mod graph;
pub mod instances;
pub mod oracle;
pub mod solver;
pub mod sparsify;
pub mod spectral;
pub mod stream;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Cut, Edge, WeightedGraph};
pub use solver::{CostReport, CutFinder, FinderKind};
pub use tree::{HCTree, TreeBuilder};
