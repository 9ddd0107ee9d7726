//! Small hand-drawn graphs used by the verification suites.

use crate::error::Result;
use crate::geometry::Coordinate;
use crate::graph::{rectangle, EdgeKind, EmbeddedGraph, GraphParts};

fn integer_graph(points: &[(i64, i64)], edges: &[(i64, i64)]) -> Result<EmbeddedGraph> {
    EmbeddedGraph::from_parts(&GraphParts {
        denominator: 2,
        vertices: points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (i as i64 + 1, Coordinate::new(2 * x, 2 * y)))
            .collect(),
        edges: edges.iter().map(|&(a, b)| (a, b, EdgeKind::Representative)).collect(),
    })
}

/// The unit square.
pub fn four_cycle() -> EmbeddedGraph {
    rectangle(2, 2).expect("unit square")
}

/// Two unit squares stacked on a shared edge (the 2x3 rectangle).
pub fn two_squares() -> EmbeddedGraph {
    rectangle(2, 3).expect("2x3 rectangle")
}

/// Five vertices, six edges, one crossing pair: the diagonals of a square
/// plus two of its sides, with a triangle on top. Labels 1..=5 are
/// a=(0,0), b=(4,0), c=(4,4), d=(0,4), e=(2,6).
pub fn crossed_pentagon() -> EmbeddedGraph {
    integer_graph(
        &[(0, 0), (4, 0), (4, 4), (0, 4), (2, 6)],
        &[(1, 3), (2, 4), (1, 2), (3, 4), (4, 5), (5, 3)],
    )
    .expect("crossed pentagon")
}

/// Six vertices carrying two figure-eight shaped closed walks:
/// `1 2 3 4 5 6` crosses itself once and `1 2 3 5 4 6` twice.
pub fn figure_eight() -> EmbeddedGraph {
    integer_graph(
        &[(0, 1), (1, 2), (3, 0), (4, 1), (3, 2), (1, 0)],
        &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1), (3, 5), (4, 6)],
    )
    .expect("figure eight")
}

/// Two unit squares sharing only the corner (1,1).
pub fn corner_squares() -> EmbeddedGraph {
    integer_graph(
        &[(0, 0), (1, 0), (1, 1), (0, 1), (2, 1), (2, 2), (1, 2)],
        &[(1, 2), (2, 3), (3, 4), (4, 1), (3, 5), (5, 6), (6, 7), (7, 3)],
    )
    .expect("corner squares")
}

/// Vertex ids along a labelled walk.
pub fn walk_by_labels(g: &EmbeddedGraph, labels: &[i64]) -> Vec<usize> {
    labels
        .iter()
        .map(|&l| g.vertex_by_label(l).expect("fixture label"))
        .collect()
}

/// Unit squares `[0,1]^2` and `[2,3] x [0,1]` joined by the bridge
/// `(1,0)-(2,0)`.
pub fn dumbbell() -> EmbeddedGraph {
    integer_graph(
        &[(0, 0), (1, 0), (1, 1), (0, 1), (2, 0), (3, 0), (3, 1), (2, 1)],
        &[(1, 2), (2, 3), (3, 4), (4, 1), (2, 5), (5, 6), (6, 7), (7, 8), (8, 5)],
    )
    .expect("dumbbell")
}

/// The closed walk on [`dumbbell`] that goes round both squares and
/// crosses the bridge once in each direction.
pub fn dumbbell_walk(g: &EmbeddedGraph) -> Vec<usize> {
    walk_by_labels(g, &[2, 3, 4, 1, 2, 5, 8, 7, 6, 5])
}
