//! Canonical loops: closed non-backtracking walks up to rotation and reversal.

use std::cmp::Ordering;
use std::f64::consts::{SQRT_2, TAU};
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{strictly_inside_ccw_arc, turning_angle};
use crate::graph::{EdgeId, EdgeSet, EdgeWeights, EmbeddedGraph, VertexId};

/// Winding angles must sit this close to a multiple of `2 pi`.
pub const WINDING_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    vertices: Vec<VertexId>,
    multiplicity: usize,
    winding_turns: i64,
    length: usize,
}

impl Loop {
    /// The canonical vertex sequence.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.vertices.len()
    }

    /// Steps divided by the smallest period.
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// Winding angle in full turns (the angle is `2 pi` times this).
    pub fn winding_turns(&self) -> i64 {
        self.winding_turns
    }

    pub fn winding(&self) -> f64 {
        TAU * self.winding_turns as f64
    }

    /// `-exp(i alpha / 2)`: `+1` for an odd number of turns, `-1` otherwise.
    pub fn sign(&self) -> i8 {
        if self.winding_turns.rem_euclid(2) == 1 {
            1
        } else {
            -1
        }
    }

    /// Steps along representative edges.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Edge of step `i` (from vertex `i` to vertex `i + 1`, cyclically).
    pub fn step_edge(&self, g: &EmbeddedGraph, i: usize) -> EdgeId {
        let n = self.vertices.len();
        g.edge_between(self.vertices[i], self.vertices[(i + 1) % n])
            .expect("loop steps are edges")
    }

    pub fn step_edges(&self, g: &EmbeddedGraph) -> Vec<EdgeId> {
        (0..self.steps()).map(|i| self.step_edge(g, i)).collect()
    }

    /// Product of the weights of all steps.
    pub fn edge_product(&self, g: &EmbeddedGraph, x: &EdgeWeights) -> f64 {
        (0..self.steps()).map(|i| x.get(self.step_edge(g, i))).product()
    }

    /// `sign / m` times the product of all step weights.
    pub fn weight(&self, g: &EmbeddedGraph, x: &EdgeWeights) -> f64 {
        self.sign() as f64 / self.multiplicity as f64 * self.edge_product(g, x)
    }

    /// True when no edge is traversed twice.
    pub fn is_edge_disjoint(&self, g: &EmbeddedGraph) -> bool {
        let mut seen = EdgeSet::empty(g.num_edges());
        for e in self.step_edges(g) {
            if seen.contains(e) {
                return false;
            }
            seen.insert(e);
        }
        true
    }
}

/// Checks that `path` is a closed non-backtracking walk in `g`.
pub fn validate_closed_path(g: &EmbeddedGraph, path: &[VertexId]) -> Result<()> {
    let n = path.len();
    if n < 3 {
        return Err(Error::InvalidPath(format!("a closed path needs at least 3 steps, got {n}")));
    }
    for i in 0..n {
        let (a, b, c) = (path[i], path[(i + 1) % n], path[(i + 2) % n]);
        if a >= g.num_vertices() || g.edge_between(a, b).is_none() {
            return Err(Error::InvalidPath(format!("step {i} is not an edge")));
        }
        if a == c {
            return Err(Error::InvalidPath(format!("backtracking at step {}", i + 1)));
        }
    }
    Ok(())
}

fn rotation_cmp(s: &[VertexId], start: usize, reversed: bool) -> Ordering {
    let n = s.len();
    for k in 0..n {
        let idx = if reversed { (start + n - k) % n } else { (start + k) % n };
        match s[idx].cmp(&s[k]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// True when `s` is the smallest of its rotations and reversed rotations.
pub fn is_canonical_sequence(s: &[VertexId]) -> bool {
    let first = s[0];
    (0..s.len()).filter(|&k| s[k] == first).all(|k| {
        (k == 0 || rotation_cmp(s, k, false) != Ordering::Less) && rotation_cmp(s, k, true) != Ordering::Less
    })
}

/// The smallest of the `2n` representations of a cyclic sequence.
pub fn canonical_sequence(s: &[VertexId]) -> Vec<VertexId> {
    let n = s.len();
    let mut best: Vec<VertexId> = s.to_vec();
    for start in 0..n {
        for reversed in [false, true] {
            let cand: Vec<VertexId> = (0..n)
                .map(|k| if reversed { s[(start + n - k) % n] } else { s[(start + k) % n] })
                .collect();
            if cand < best {
                best = cand;
            }
        }
    }
    best
}

fn smallest_period(s: &[VertexId]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| s[i] == s[(i + p) % n]))
        .unwrap_or(n)
}

/// Sum of the turning angles of a closed walk, cyclically.
pub fn closed_winding(g: &EmbeddedGraph, s: &[VertexId]) -> Result<f64> {
    let n = s.len();
    let mut alpha = 0.0;
    for i in 0..n {
        alpha += turning_angle(g.coord(s[i]), g.coord(s[(i + 1) % n]), g.coord(s[(i + 2) % n]))?;
    }
    Ok(alpha)
}

/// Sum of the `n - 2` interior turning angles of an open walk.
pub fn open_winding(g: &EmbeddedGraph, s: &[VertexId]) -> Result<f64> {
    let mut alpha = 0.0;
    for w in s.windows(3) {
        alpha += turning_angle(g.coord(w[0]), g.coord(w[1]), g.coord(w[2]))?;
    }
    Ok(alpha)
}

/// Rounds a winding angle to whole turns, failing when it is not a
/// multiple of `2 pi`.
pub fn snap_turns(alpha: f64) -> Result<i64> {
    let turns = (alpha / TAU).round();
    if (alpha - turns * TAU).abs() > WINDING_TOLERANCE {
        return Err(Error::Geometry(format!("winding angle {alpha} is not a multiple of 2 pi")));
    }
    Ok(turns as i64)
}

/// Sign `-exp(i alpha / 2)` of any closed walk.
pub fn closed_path_sign(g: &EmbeddedGraph, s: &[VertexId]) -> Result<i8> {
    let turns = snap_turns(closed_winding(g, s)?)?;
    Ok(if turns.rem_euclid(2) == 1 { 1 } else { -1 })
}

/// Builds the canonical loop of a closed non-backtracking walk.
pub fn canonicalize(g: &EmbeddedGraph, path: &[VertexId]) -> Result<Loop> {
    validate_closed_path(g, path)?;
    from_valid_path(g, canonical_sequence(path))
}

fn from_valid_path(g: &EmbeddedGraph, vertices: Vec<VertexId>) -> Result<Loop> {
    let n = vertices.len();
    let winding_turns = snap_turns(closed_winding(g, &vertices)?)?;
    let length = (0..n)
        .filter(|&i| {
            let e = g.edge_between(vertices[i], vertices[(i + 1) % n]).expect("validated");
            g.edge(e).is_representative()
        })
        .count();
    Ok(Loop { multiplicity: n / smallest_period(&vertices), winding_turns, length, vertices })
}

/// Self-crossings of a loop: `(vertex crossings, edge crossings)`.
///
/// Two visits of the same vertex cross when the neighbours of the second
/// visit are separated by the two half-lines pointing to the neighbours of
/// the first visit. Two steps cross when their edges cross.
pub fn self_crossings(g: &EmbeddedGraph, l: &Loop) -> (usize, usize) {
    let s = l.vertices();
    let n = s.len();
    let dir = |from: VertexId, to: VertexId| g.coord(to).minus(g.coord(from));
    let mut vertex = 0;
    for i in 0..n {
        for j in i + 1..n {
            if s[i] != s[j] {
                continue;
            }
            let v = s[i];
            let a = dir(v, s[(i + n - 1) % n]);
            let b = dir(v, s[(i + 1) % n]);
            let c = dir(v, s[(j + n - 1) % n]);
            let d = dir(v, s[(j + 1) % n]);
            if strictly_inside_ccw_arc(a, b, c) != strictly_inside_ccw_arc(a, b, d) {
                vertex += 1;
            }
        }
    }
    let edges = l.step_edges(g);
    let mut edge = 0;
    for i in 0..n {
        for j in i + 1..n {
            if g.edges_cross(edges[i], edges[j]) {
                edge += 1;
            }
        }
    }
    (vertex, edge)
}

/// How far an enumeration goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopBound {
    /// At most this many steps in total.
    Steps(usize),
    /// At most this many steps along representative edges.
    Length(usize),
}

/// Restriction applied to enumerated loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopFilter {
    All,
    /// Loops whose smallest vertex is the given one.
    AnchoredAt(VertexId),
    /// Loops with an odd number of steps on the given edges.
    OddOn(EdgeSet),
    /// Loops that traverse the given edge exactly once.
    MarkedOnce(EdgeId),
}

impl LoopFilter {
    fn accepts(&self, g: &EmbeddedGraph, s: &[VertexId]) -> bool {
        let n = s.len();
        let step = |i: usize| g.edge_between(s[i], s[(i + 1) % n]).expect("walk edges exist");
        match self {
            LoopFilter::All | LoopFilter::AnchoredAt(_) => true,
            LoopFilter::OddOn(set) => (0..n).filter(|&i| set.contains(step(i))).count() % 2 == 1,
            LoopFilter::MarkedOnce(e) => (0..n).filter(|&i| step(i) == *e).count() == 1,
        }
    }
}

struct Search<'a, F: FnMut(Loop) -> Result<()>> {
    g: &'a EmbeddedGraph,
    anchor: VertexId,
    bound: LoopBound,
    filter: &'a LoopFilter,
    path: Vec<VertexId>,
    representative_steps: usize,
    emit: F,
}

impl<F: FnMut(Loop) -> Result<()>> Search<'_, F> {
    fn extend(&mut self) -> Result<()> {
        let n = self.path.len();
        let current = self.path[n - 1];
        let previous = if n >= 2 { Some(self.path[n - 2]) } else { None };
        for &(w, e) in self.g.neighbors(current) {
            if w < self.anchor || Some(w) == previous {
                continue;
            }
            let rep = self.g.edge(e).is_representative() as usize;
            let within = match self.bound {
                LoopBound::Steps(max) => n <= max,
                LoopBound::Length(max) => self.representative_steps + rep <= max,
            };
            if !within {
                continue;
            }
            if w == self.anchor
                && n >= 3
                && self.path[1] != current
                && is_canonical_sequence(&self.path)
                && self.filter.accepts(self.g, &self.path)
            {
                let l = from_valid_path(self.g, self.path.clone())?;
                (self.emit)(l)?;
            }
            self.path.push(w);
            self.representative_steps += rep;
            let result = self.extend();
            self.representative_steps -= rep;
            self.path.pop();
            result?;
        }
        Ok(())
    }
}

/// Calls `emit` once for every canonical loop within `bound` accepted by
/// `filter`. Walks start at each candidate smallest vertex and never visit
/// a smaller one; only walks that already are canonical are emitted.
pub fn for_each_loop<F>(g: &EmbeddedGraph, bound: LoopBound, filter: &LoopFilter, emit: F) -> Result<()>
where
    F: FnMut(Loop) -> Result<()>,
{
    let anchors: Vec<VertexId> = match filter {
        LoopFilter::AnchoredAt(v) => vec![*v],
        _ => (0..g.num_vertices()).collect(),
    };
    let mut search = Search {
        g,
        anchor: 0,
        bound,
        filter,
        path: Vec::new(),
        representative_steps: 0,
        emit,
    };
    for a in anchors {
        search.anchor = a;
        search.path.clear();
        search.path.push(a);
        search.representative_steps = 0;
        search.extend()?;
    }
    Ok(())
}

/// All canonical loops within `bound` passing `filter`, in canonical order
/// (by length of the sequence, then lexicographically).
pub fn enumerate_loops(g: &EmbeddedGraph, bound: LoopBound, filter: &LoopFilter) -> Result<Vec<Loop>> {
    let mut out = Vec::new();
    for_each_loop(g, bound, filter, |l| {
        out.push(l);
        Ok(())
    })?;
    out.sort_by(|a, b| (a.steps(), a.vertices()).cmp(&(b.steps(), b.vertices())));
    Ok(out)
}

/// `(sqrt 2 + 1)`, the norm of the turning-phase transfer on the lattice.
pub const LATTICE_NORM: f64 = SQRT_2 + 1.0;

/// Per-length sums of loop weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSeriesAccumulator {
    /// `sums[r]` is the summed weight of the loops of length `r`.
    pub sums: Vec<f64>,
    /// Number of loops counted at each length.
    pub counts: Vec<usize>,
    pub r_max: usize,
    /// Bound on the omitted lengths `r > r_max`; infinite when the norm
    /// bound does not apply.
    pub tail_bound: f64,
}

impl LoopSeriesAccumulator {
    pub fn new(r_max: usize) -> Self {
        LoopSeriesAccumulator { sums: vec![0.0; r_max + 1], counts: vec![0; r_max + 1], r_max, tail_bound: f64::INFINITY }
    }

    pub fn add(&mut self, length: usize, weight: f64) {
        self.sums[length] += weight;
        self.counts[length] += 1;
    }

    pub fn get(&self, r: usize) -> f64 {
        self.sums.get(r).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.sums.iter().sum()
    }

    pub fn merge(&mut self, other: &LoopSeriesAccumulator) {
        for r in 0..=self.r_max.min(other.r_max) {
            self.sums[r] += other.sums[r];
            self.counts[r] += other.counts[r];
        }
    }
}

/// `sum_{r > r_max} prefactor r^{-1} q^r`, or infinity when `q >= 1`.
pub fn geometric_tail(prefactor: f64, q: f64, r_max: usize) -> f64 {
    if !(q < 1.0) {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    let mut r = r_max + 1;
    let mut power = q.powi(r as i32);
    while power > 0.0 {
        let term = prefactor * power / r as f64;
        total += term;
        if term < total * 1e-17 {
            break;
        }
        r += 1;
        power *= q;
    }
    total
}

/// Loop weights summed by length for `r <= r_max`.
pub fn length_sums(g: &EmbeddedGraph, x: &EdgeWeights, r_max: usize, filter: &LoopFilter) -> Result<LoopSeriesAccumulator> {
    let mut acc = LoopSeriesAccumulator::new(r_max);
    for_each_loop(g, LoopBound::Length(r_max), filter, |l| {
        acc.add(l.length(), l.weight(g, x));
        Ok(())
    })?;
    acc.tail_bound = geometric_tail(2.0 * g.num_vertices() as f64, LATTICE_NORM * x.sup_norm(), r_max);
    Ok(acc)
}

fn format_position(g: &EmbeddedGraph, v: VertexId) -> String {
    let (x, y) = g.position(v);
    format!("({x},{y})")
}

/// Writes the loops as CSV rows `n, r, m, sign, sequence`.
pub fn write_census_csv<W: Write>(g: &EmbeddedGraph, loops: &[Loop], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("writing census: {e}"));
    w.write_record(["n", "r", "m", "sign", "sequence"]).map_err(io)?;
    for l in loops {
        let seq: Vec<String> = l.vertices().iter().map(|&v| format_position(g, v)).collect();
        w.write_record([
            l.steps().to_string(),
            l.length().to_string(),
            l.multiplicity().to_string(),
            l.sign().to_string(),
            seq.join(" "),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing census: {e}")))?;
    Ok(())
}
