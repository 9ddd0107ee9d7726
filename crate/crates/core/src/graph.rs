//! Finite graphs drawn in the plane with straight edges.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_segment_interior, segments_cross, Coordinate};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Denominator used by every built-in constructor. Two is enough for the
/// square lattice and its dual.
pub const DEFAULT_DENOMINATOR: i64 = 2;

/// Numerators of the integer point `(x, y)` over [`DEFAULT_DENOMINATOR`].
pub fn lattice_point(x: i64, y: i64) -> Coordinate {
    Coordinate::new(x * DEFAULT_DENOMINATOR, y * DEFAULT_DENOMINATOR)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Representative,
    Additional,
}

/// An undirected edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn is_representative(&self) -> bool {
        self.kind == EdgeKind::Representative
    }
}

/// Placement of a full unit-spaced grid with all nearest-neighbour edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    /// Numerators of the lower-left corner.
    pub origin: Coordinate,
    pub width: usize,
    pub height: usize,
}

/// Vertices (by external label and position) and edges (by label pairs),
/// before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParts {
    pub denominator: i64,
    pub vertices: Vec<(i64, Coordinate)>,
    pub edges: Vec<(i64, i64, EdgeKind)>,
}

#[derive(Clone, Debug)]
pub struct EmbeddedGraph {
    denominator: i64,
    coords: Vec<Coordinate>,
    labels: Vec<i64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    by_coord: HashMap<Coordinate, VertexId>,
    by_label: HashMap<i64, VertexId>,
    crossings: Vec<(EdgeId, EdgeId)>,
    crossing_set: HashSet<(EdgeId, EdgeId)>,
    lattice: Option<LatticeBox>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl EmbeddedGraph {
    /// Validates and builds a graph. Vertex ids are assigned in
    /// lexicographic order of the coordinates, so comparing ids compares
    /// positions.
    pub fn from_parts(parts: &GraphParts) -> Result<Self> {
        let d = parts.denominator;
        if d < 1 || (d & (d - 1)) != 0 {
            return Err(Error::InvalidGraph(format!("denominator {d} is not a power of two")));
        }
        let mut order: Vec<usize> = (0..parts.vertices.len()).collect();
        order.sort_by_key(|&i| parts.vertices[i].1);
        let coords: Vec<Coordinate> = order.iter().map(|&i| parts.vertices[i].1).collect();
        let labels: Vec<i64> = order.iter().map(|&i| parts.vertices[i].0).collect();
        let mut by_coord = HashMap::new();
        let mut by_label = HashMap::new();
        for (id, (&c, &l)) in coords.iter().zip(&labels).enumerate() {
            if by_coord.insert(c, id).is_some() {
                return Err(Error::InvalidGraph(format!("two vertices at ({}, {})", c.x, c.y)));
            }
            if by_label.insert(l, id).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {l}")));
            }
        }

        let mut raw = Vec::with_capacity(parts.edges.len());
        let mut seen = HashSet::new();
        for &(a, b, kind) in &parts.edges {
            let u = *by_label
                .get(&a)
                .ok_or_else(|| Error::InvalidGraph(format!("edge names unknown vertex {a}")))?;
            let v = *by_label
                .get(&b)
                .ok_or_else(|| Error::InvalidGraph(format!("edge names unknown vertex {b}")))?;
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let (u, v) = ordered(u, v);
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("multiple edges between {a} and {b}")));
            }
            raw.push(Edge { u, v, kind });
        }
        raw.sort_by_key(|e| (e.u, e.v));

        for e in &raw {
            for (w, &p) in coords.iter().enumerate() {
                if w != e.u && w != e.v && in_segment_interior(p, coords[e.u], coords[e.v]) {
                    return Err(Error::InvalidGraph(format!(
                        "vertex {} lies on the edge {}-{}",
                        labels[w], labels[e.u], labels[e.v]
                    )));
                }
            }
        }

        // The additional edges must form a forest.
        let mut parent: Vec<usize> = (0..coords.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in raw.iter().filter(|e| e.kind == EdgeKind::Additional) {
            let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if ru == rv {
                return Err(Error::InvalidGraph("additional edges contain a cycle".into()));
            }
            parent[ru] = rv;
        }

        let mut adjacency = vec![Vec::new(); coords.len()];
        let mut edge_index = HashMap::new();
        for (id, e) in raw.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
            edge_index.insert((e.u, e.v), id);
        }
        for list in &mut adjacency {
            list.sort();
        }

        let mut crossings = Vec::new();
        for i in 0..raw.len() {
            for j in i + 1..raw.len() {
                let (a, b) = (raw[i], raw[j]);
                if segments_cross(coords[a.u], coords[a.v], coords[b.u], coords[b.v]) {
                    crossings.push((i, j));
                }
            }
        }
        let crossing_set = crossings.iter().copied().collect();

        let mut g = EmbeddedGraph {
            denominator: d,
            coords,
            labels,
            edges: raw,
            adjacency,
            edge_index,
            by_coord,
            by_label,
            crossings,
            crossing_set,
            lattice: None,
        };
        g.lattice = g.detect_lattice_box();
        Ok(g)
    }

    fn detect_lattice_box(&self) -> Option<LatticeBox> {
        let d = self.denominator;
        let first = *self.coords.first()?;
        let last = *self.coords.last()?;
        let min_y = self.coords.iter().map(|c| c.y).min()?;
        let max_y = self.coords.iter().map(|c| c.y).max()?;
        let (span_x, span_y) = (last.x - first.x, max_y - min_y);
        if span_x % d != 0 || span_y % d != 0 {
            return None;
        }
        let width = (span_x / d + 1) as usize;
        let height = (span_y / d + 1) as usize;
        if width * height != self.coords.len() {
            return None;
        }
        let origin = Coordinate::new(first.x, min_y);
        let on_grid = self.coords.iter().all(|c| (c.x - origin.x) % d == 0 && (c.y - origin.y) % d == 0);
        let expected_edges = (width - 1) * height + width * (height - 1);
        let unit = self.edges.iter().all(|e| {
            let (dx, dy) = self.coords[e.v].minus(self.coords[e.u]);
            e.is_representative() && dx.abs() + dy.abs() == d && (dx == 0 || dy == 0)
        });
        (on_grid && unit && self.edges.len() == expected_edges).then_some(LatticeBox { origin, width, height })
    }

    pub fn to_parts(&self) -> GraphParts {
        GraphParts {
            denominator: self.denominator,
            vertices: self.labels.iter().copied().zip(self.coords.iter().copied()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (self.labels[e.u], self.labels[e.v], e.kind))
                .collect(),
        }
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coord(&self, v: VertexId) -> Coordinate {
        self.coords[v]
    }

    /// Coordinates as floating-point numbers (for display only).
    pub fn position(&self, v: VertexId) -> (f64, f64) {
        let c = self.coords[v];
        (c.x as f64 / self.denominator as f64, c.y as f64 / self.denominator as f64)
    }

    pub fn label(&self, v: VertexId) -> i64 {
        self.labels[v]
    }

    pub fn vertex_by_label(&self, label: i64) -> Option<VertexId> {
        self.by_label.get(&label).copied()
    }

    pub fn vertex_at(&self, c: Coordinate) -> Option<VertexId> {
        self.by_coord.get(&c).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&ordered(a, b)).copied()
    }

    /// Neighbours of `v` with the connecting edge, sorted by neighbour id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_additional_edges(&self) -> bool {
        self.edges.iter().any(|e| e.kind == EdgeKind::Additional)
    }

    /// Unordered crossing pairs `(e, f)` with `e < f`.
    pub fn crossings(&self) -> &[(EdgeId, EdgeId)] {
        &self.crossings
    }

    pub fn edges_cross(&self, e: EdgeId, f: EdgeId) -> bool {
        self.crossing_set.contains(&ordered(e, f))
    }

    /// Set when the graph is a full rectangle of a unit square grid (the
    /// integer lattice or a translate of it) without additional edges.
    pub fn lattice_box(&self) -> Option<LatticeBox> {
        self.lattice
    }

    /// Vertex at grid offset `(i, j)` from the lower-left corner of a lattice box.
    pub fn grid_vertex(&self, i: usize, j: usize) -> Option<VertexId> {
        let b = self.lattice?;
        if i >= b.width || j >= b.height {
            return None;
        }
        self.vertex_at(b.origin.offset(i as i64 * self.denominator, j as i64 * self.denominator))
    }

    /// Grid offset of `v` inside the lattice box.
    pub fn grid_offset(&self, v: VertexId) -> Option<(usize, usize)> {
        let b = self.lattice?;
        let (dx, dy) = self.coords[v].minus(b.origin);
        Some(((dx / self.denominator) as usize, (dy / self.denominator) as usize))
    }

    /// Boundary vertices of a lattice box: those on its outer frame.
    pub fn boundary(&self) -> Result<Vec<VertexId>> {
        let b = self
            .lattice
            .ok_or_else(|| Error::InvalidInput("boundary is only defined for rectangles".into()))?;
        Ok((0..self.num_vertices())
            .filter(|&v| {
                let (i, j) = self.grid_offset(v).unwrap_or((0, 0));
                i == 0 || j == 0 || i + 1 == b.width || j + 1 == b.height
            })
            .collect())
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        match (self.lattice, self.grid_offset(v)) {
            (Some(b), Some((i, j))) => i == 0 || j == 0 || i + 1 == b.width || j + 1 == b.height,
            _ => false,
        }
    }

    pub fn cycle_space_dimension(&self) -> usize {
        self.edges.len() + self.component_count() - self.num_vertices()
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.num_vertices()];
        let mut count = 0;
        for s in 0..self.num_vertices() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Places `other` next to `self` translated by `shift` (numerators).
    pub fn disjoint_union(&self, other: &EmbeddedGraph, shift: Coordinate) -> Result<EmbeddedGraph> {
        if self.denominator != other.denominator {
            return Err(Error::InvalidGraph("denominators differ".into()));
        }
        let mut parts = self.to_parts();
        let base = self.labels.iter().copied().max().map_or(0, |m| m + 1)
            - other.labels.iter().copied().min().unwrap_or(0);
        for (l, c) in other.to_parts().vertices {
            parts.vertices.push((l + base, c.offset(shift.x, shift.y)));
        }
        for (a, b, k) in other.to_parts().edges {
            parts.edges.push((a + base, b + base, k));
        }
        EmbeddedGraph::from_parts(&parts)
    }

    pub fn from_json_str(s: &str) -> Result<EmbeddedGraph> {
        let file: GraphFile = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("graph JSON: {e}")))?;
        EmbeddedGraph::from_parts(&GraphParts {
            denominator: file.denominator,
            vertices: file.vertices.iter().map(|v| (v.id, Coordinate::new(v.x, v.y))).collect(),
            edges: file.edges.iter().map(|e| (e.u, e.v, e.kind)).collect(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            denominator: self.denominator,
            vertices: (0..self.num_vertices())
                .map(|v| VertexRecord { id: self.labels[v], x: self.coords[v].x, y: self.coords[v].y })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord { u: self.labels[e.u], v: self.labels[e.v], kind: e.kind })
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: i64,
    x: i64,
    y: i64,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: i64,
    v: i64,
    #[serde(default = "representative")]
    kind: EdgeKind,
}

fn representative() -> EdgeKind {
    EdgeKind::Representative
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(default = "default_denominator")]
    denominator: i64,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
}

fn default_denominator() -> i64 {
    DEFAULT_DENOMINATOR
}

/// The `width x height` grid with lower-left corner `origin` (numerators over
/// [`DEFAULT_DENOMINATOR`]). Vertex labels follow the id order.
pub fn build_rectangle(width: usize, height: usize, origin: Coordinate) -> Result<EmbeddedGraph> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("rectangle sides must be positive".into()));
    }
    grid_parts(width, height, origin, DEFAULT_DENOMINATOR).and_then(|p| EmbeddedGraph::from_parts(&p))
}

/// The rectangle with its lower-left corner at the integer origin.
pub fn rectangle(width: usize, height: usize) -> Result<EmbeddedGraph> {
    build_rectangle(width, height, Coordinate::new(0, 0))
}

fn grid_parts(width: usize, height: usize, origin: Coordinate, d: i64) -> Result<GraphParts> {
    let label = |i: usize, j: usize| (i * height + j) as i64;
    let mut vertices = Vec::with_capacity(width * height);
    let mut edges = Vec::new();
    for i in 0..width {
        for j in 0..height {
            vertices.push((label(i, j), origin.offset(i as i64 * d, j as i64 * d)));
            if i + 1 < width {
                edges.push((label(i, j), label(i + 1, j), EdgeKind::Representative));
            }
            if j + 1 < height {
                edges.push((label(i, j), label(i, j + 1), EdgeKind::Representative));
            }
        }
    }
    Ok(GraphParts { denominator: d, vertices, edges })
}

/// The rectangle formed by the centres of the bounded faces of a rectangle.
pub fn build_weak_dual(g: &EmbeddedGraph) -> Result<EmbeddedGraph> {
    let b = g
        .lattice_box()
        .ok_or_else(|| Error::InvalidInput("weak dual needs a rectangle".into()))?;
    if b.width < 2 || b.height < 2 {
        return Err(Error::InvalidInput("rectangle has no bounded faces; the weak dual is empty".into()));
    }
    let d = g.denominator();
    if d % 2 != 0 {
        return Err(Error::InvalidInput("face centres need an even denominator".into()));
    }
    let parts = grid_parts(b.width - 1, b.height - 1, b.origin.offset(d / 2, d / 2), d)?;
    EmbeddedGraph::from_parts(&parts)
}

/// Weights indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn uniform(g: &EmbeddedGraph, x: f64) -> Self {
        EdgeWeights(vec![x; g.num_edges()])
    }

    pub fn from_vec(g: &EmbeddedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.num_edges() {
            return Err(Error::InvalidInput(format!(
                "{} weights given for {} edges",
                values.len(),
                g.num_edges()
            )));
        }
        Ok(EdgeWeights(values))
    }

    /// Representative edges get `x`; additional edges get `additional`.
    pub fn by_kind(g: &EmbeddedGraph, x: f64, additional: f64) -> Self {
        EdgeWeights(
            g.edges()
                .iter()
                .map(|e| if e.is_representative() { x } else { additional })
                .collect(),
        )
    }

    pub fn get(&self, e: EdgeId) -> f64 {
        self.0[e]
    }

    pub fn set(&mut self, e: EdgeId, w: f64) {
        self.0[e] = w;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Largest absolute weight over all edges.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Reads `{"default": w, "overrides": [{"u", "v", "w"}]}` with vertex labels.
    pub fn from_json_str(g: &EmbeddedGraph, s: &str) -> Result<Self> {
        let file: WeightsFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("weights JSON: {e}")))?;
        let mut w = EdgeWeights::uniform(g, file.default);
        for o in file.overrides {
            let (a, b) = (g.vertex_by_label(o.u), g.vertex_by_label(o.v));
            let e = a
                .zip(b)
                .and_then(|(a, b)| g.edge_between(a, b))
                .ok_or_else(|| Error::InvalidInput(format!("no edge between {} and {}", o.u, o.v)))?;
            w.set(e, o.w);
        }
        if w.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(w)
    }
}

#[derive(Deserialize)]
struct WeightOverride {
    u: i64,
    v: i64,
    w: f64,
}

#[derive(Deserialize)]
struct WeightsFile {
    default: f64,
    #[serde(default)]
    overrides: Vec<WeightOverride>,
}

/// A set of edge ids backed by a bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet {
    words: Vec<u64>,
    capacity: usize,
}

impl EdgeSet {
    pub fn empty(capacity: usize) -> Self {
        EdgeSet { words: vec![0; capacity.div_ceil(64)], capacity }
    }

    pub fn from_edges<I: IntoIterator<Item = EdgeId>>(capacity: usize, edges: I) -> Self {
        let mut s = EdgeSet::empty(capacity);
        for e in edges {
            s.insert(e);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.words[e / 64] |= 1 << (e % 64);
    }

    pub fn remove(&mut self, e: EdgeId) {
        self.words[e / 64] &= !(1 << (e % 64));
    }

    pub fn toggle(&mut self, e: EdgeId) {
        self.words[e / 64] ^= 1 << (e % 64);
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        e < self.capacity && self.words[e / 64] & (1 << (e % 64)) != 0
    }

    pub fn symmetric_difference_with(&mut self, other: &EdgeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * 64 + bit)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts() {
        let g = rectangle(2, 2).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges(), g.crossings().len()), (4, 4, 0));
        let g = rectangle(3, 3).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
        let g = rectangle(1, 1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (1, 0));
        assert!(rectangle(0, 3).is_err());
    }

    #[test]
    fn vertex_ids_follow_lexicographic_order() {
        let g = rectangle(3, 2).unwrap();
        for v in 1..g.num_vertices() {
            assert!(g.coord(v - 1) < g.coord(v));
        }
        assert_eq!(g.coord(1), lattice_point(0, 1));
    }

    #[test]
    fn weak_duals() {
        let d = build_weak_dual(&rectangle(2, 2).unwrap()).unwrap();
        assert_eq!((d.num_vertices(), d.num_edges()), (1, 0));
        assert_eq!(d.coord(0), Coordinate::new(1, 1));
        let d = build_weak_dual(&rectangle(3, 3).unwrap()).unwrap();
        assert_eq!((d.num_vertices(), d.num_edges()), (4, 4));
        let d = build_weak_dual(&rectangle(4, 3).unwrap()).unwrap();
        let b = d.lattice_box().unwrap();
        assert_eq!((b.width, b.height), (3, 2));
        assert!(build_weak_dual(&rectangle(1, 4).unwrap()).is_err());
    }

    #[test]
    fn rejects_vertex_on_edge_and_additional_cycles() {
        let parts = GraphParts {
            denominator: 2,
            vertices: vec![(0, Coordinate::new(0, 0)), (1, Coordinate::new(2, 0)), (2, Coordinate::new(4, 0))],
            edges: vec![(0, 2, EdgeKind::Representative)],
        };
        assert!(EmbeddedGraph::from_parts(&parts).is_err());
        let parts = GraphParts {
            denominator: 2,
            vertices: vec![(0, Coordinate::new(0, 0)), (1, Coordinate::new(2, 0)), (2, Coordinate::new(0, 2))],
            edges: vec![
                (0, 1, EdgeKind::Additional),
                (1, 2, EdgeKind::Additional),
                (2, 0, EdgeKind::Additional),
            ],
        };
        assert!(matches!(EmbeddedGraph::from_parts(&parts), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn crossing_diagonals_registered() {
        let parts = GraphParts {
            denominator: 1,
            vertices: vec![
                (0, Coordinate::new(0, 0)),
                (1, Coordinate::new(1, 1)),
                (2, Coordinate::new(0, 1)),
                (3, Coordinate::new(1, 0)),
            ],
            edges: vec![(0, 1, EdgeKind::Representative), (2, 3, EdgeKind::Representative)],
        };
        let g = EmbeddedGraph::from_parts(&parts).unwrap();
        assert_eq!(g.crossings(), &[(0, 1)]);
        assert!(g.lattice_box().is_none());
    }

    #[test]
    fn json_round_trip() {
        let g = rectangle(2, 3).unwrap();
        let h = EmbeddedGraph::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(g.to_parts(), h.to_parts());
        assert!(EmbeddedGraph::from_json_str("{").is_err());
        let w = EdgeWeights::from_json_str(&g, r#"{"default": 0.2, "overrides": [{"u": 0, "v": 1, "w": 0.5}]}"#).unwrap();
        let e = g.edge_between(0, 1).unwrap();
        assert_eq!(w.get(e), 0.5);
        assert_eq!(w.sup_norm(), 0.5);
        assert!(EdgeWeights::from_json_str(&g, r#"{"default": 0.2, "overrides": [{"u": 0, "v": 5, "w": 1}]}"#).is_err());
    }

    #[test]
    fn edge_set_ops() {
        let mut s = EdgeSet::from_edges(130, [0, 64, 129]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        s.toggle(64);
        assert!(!s.contains(64));
        assert_eq!(s.len(), 2);
    }
}
