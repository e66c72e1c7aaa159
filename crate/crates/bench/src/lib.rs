//! Fixtures shared by the benchmarks.

use s1graph::graph_model::{enumerate_graphs, EnumBounds};
use s1graph::ExtendedGraph;

/// A small corpus, fixed so timings compare across runs.
pub fn corpus(max_edges: usize) -> Vec<ExtendedGraph> {
    enumerate_graphs(EnumBounds::new(max_edges, 3, 2))
}

/// The largest graph of the corpus by edge count, first in corpus order.
pub fn largest(max_edges: usize) -> ExtendedGraph {
    let gs = corpus(max_edges);
    let top = gs.iter().map(|g| g.edge_count()).max().unwrap_or(0);
    gs.into_iter().find(|g| g.edge_count() == top).expect("empty corpus")
}
