//! Signed loop expansions of planar Ising models.
//!
//! The crate builds embedded graphs with exact coordinates, enumerates
//! even subgraphs and non-backtracking loops, evaluates Kac-Ward
//! determinants, and computes Ising partition functions, free energies and
//! correlation functions by several independent routes.

// Comparisons are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cancellation;
pub mod error;
pub mod even;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod ising;
pub mod kac_ward;
pub mod limits;
pub mod loops;
pub mod onsager;
pub mod record;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::Coordinate;
pub use graph::{build_rectangle, build_weak_dual, rectangle, EdgeId, EdgeKind, EdgeSet, EdgeWeights, EmbeddedGraph, VertexId};
pub use limits::Limits;
