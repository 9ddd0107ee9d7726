//! Combinatorics behind the loop expansion: pairings at even vertices,
//! decompositions of even subgraphs into loops, cancellation of loop
//! configurations that reuse an edge, and the labelled-loop involution that
//! explains the cancellation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::even::{crossing_count, enumerate_even_subsets, is_even};
use crate::geometry::argument_cmp;
use crate::graph::{EdgeId, EdgeSet, EdgeWeights, EmbeddedGraph, VertexId};
use crate::limits::Limits;
use crate::loops::{
    canonicalize, closed_path_sign, closed_winding, enumerate_loops, open_winding, self_crossings, validate_closed_path,
    Loop, LoopBound, LoopFilter,
};

/// Largest `k` accepted by [`pairing_parity_census`].
pub const MAX_PAIRING_HALF_DEGREE: usize = 6;
/// Largest total length for configuration enumeration.
pub const CONFIGURATION_MAX_LENGTH: usize = 10;
/// Largest graph for configuration enumeration.
pub const CONFIGURATION_MAX_EDGES: usize = 12;
/// Largest total step count for the exhaustive labelled audit.
pub const LABELLED_MAX_STEPS: usize = 10;

/// All perfect matchings of `0..n`, each as pairs `(i, j)` with `i < j`.
pub fn pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(rest: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(current.clone());
            return;
        };
        for (k, &partner) in tail.iter().enumerate() {
            let remaining: Vec<usize> = tail.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
            current.push((first, partner));
            extend(&remaining, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        extend(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    }
    out
}

/// Number of pairs of chords that interleave when `0..n` sit on a circle in order.
pub fn pairing_crossings(pairing: &[(usize, usize)]) -> usize {
    pairing
        .iter()
        .tuple_combinations()
        .filter(|(&(a, b), &(c, d))| (a < c && c < b && b < d) || (c < a && a < d && d < b))
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PartnerTally {
    /// Position of the point paired with point 0.
    pub partner: usize,
    pub even: usize,
    pub odd: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingCensus {
    pub k: usize,
    pub even: usize,
    pub odd: usize,
    pub by_partner: Vec<PartnerTally>,
}

/// Counts the pairings of `2k` points on a circle by crossing parity.
pub fn pairing_parity_census(k: usize) -> Result<PairingCensus> {
    if k == 0 || k > MAX_PAIRING_HALF_DEGREE {
        return Err(Error::InvalidInput(format!("k must be in 1..={MAX_PAIRING_HALF_DEGREE}, got {k}")));
    }
    let mut by_partner: Vec<PartnerTally> = (1..2 * k).map(|partner| PartnerTally { partner, even: 0, odd: 0 }).collect();
    for p in pairings(2 * k) {
        let partner = p.iter().find(|&&(a, _)| a == 0).expect("point 0 is paired").1;
        let tally = &mut by_partner[partner - 1];
        if pairing_crossings(&p) % 2 == 0 {
            tally.even += 1;
        } else {
            tally.odd += 1;
        }
    }
    Ok(PairingCensus {
        k,
        even: by_partner.iter().map(|t| t.even).sum(),
        odd: by_partner.iter().map(|t| t.odd).sum(),
        by_partner,
    })
}

/// Checks the census for `k` against the one for `k - 1` partner by partner:
/// a chord from point 0 with an even number of points on one side keeps
/// the parity of the rest, an odd number flips it.
pub fn pairing_recursion_holds(k: usize) -> Result<bool> {
    let census = pairing_parity_census(k)?;
    if k == 1 {
        return Ok(census.even == 1 && census.odd == 0);
    }
    let prev = pairing_parity_census(k - 1)?;
    let termwise = census.by_partner.iter().all(|t| {
        let inside = t.partner - 1;
        if inside % 2 == 0 {
            (t.even, t.odd) == (prev.even, prev.odd)
        } else {
            (t.even, t.odd) == (prev.odd, prev.even)
        }
    });
    let totals = census.even == k * prev.even + (k - 1) * prev.odd && census.odd == k * prev.odd + (k - 1) * prev.even;
    Ok(termwise && totals)
}

/// Incident edges of `v` in `f`, sorted by the angle of their direction.
fn angular_edges(g: &EmbeddedGraph, f: &EdgeSet, v: VertexId) -> Vec<EdgeId> {
    let mut out: Vec<(VertexId, EdgeId)> = g.neighbors(v).iter().copied().filter(|&(_, e)| f.contains(e)).collect();
    out.sort_by(|a, b| argument_cmp(g.coord(a.0).minus(g.coord(v)), g.coord(b.0).minus(g.coord(v))));
    out.into_iter().map(|(_, e)| e).collect()
}

/// Every decomposition of the even subset `f` into edge-disjoint loops,
/// one per choice of pairing at each vertex. Loops are traced by leaving
/// each vertex along the edge paired with the arriving one.
pub fn decompose_even_subset(g: &EmbeddedGraph, f: &EdgeSet) -> Result<Vec<Vec<Loop>>> {
    if f.capacity() != g.num_edges() {
        return Err(Error::InvalidInput("edge subset does not belong to this graph".into()));
    }
    if !is_even(g, f) {
        return Err(Error::InvalidInput("edge subset has a vertex of odd degree".into()));
    }
    let vertices: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| g.neighbors(v).iter().any(|&(_, e)| f.contains(e))).collect();
    let local: Vec<(Vec<EdgeId>, Vec<Vec<(usize, usize)>>)> = vertices
        .iter()
        .map(|&v| {
            let edges = angular_edges(g, f, v);
            let p = pairings(edges.len());
            (edges, p)
        })
        .collect();
    let mut out = Vec::new();
    for choice in local.iter().map(|(_, p)| 0..p.len()).multi_cartesian_product() {
        // partner[(vertex, edge)] = the edge paired with it at that vertex.
        let mut partner: HashMap<(VertexId, EdgeId), EdgeId> = HashMap::new();
        for ((&v, (edges, p)), &c) in vertices.iter().zip(&local).zip(&choice) {
            for &(i, j) in &p[c] {
                partner.insert((v, edges[i]), edges[j]);
                partner.insert((v, edges[j]), edges[i]);
            }
        }
        let mut used = EdgeSet::empty(g.num_edges());
        let mut loops = Vec::new();
        for start in f.iter() {
            if used.contains(start) {
                continue;
            }
            let first = g.edge(start);
            let origin = first.u;
            let mut path = vec![origin];
            let (mut at, mut via) = (first.v, start);
            used.insert(start);
            loop {
                let next = partner[&(at, via)];
                if at == origin && next == start {
                    break;
                }
                path.push(at);
                used.insert(next);
                at = g.edge(next).other(at);
                via = next;
            }
            loops.push(canonicalize(g, &path)?);
        }
        loops.sort_by(|a, b| a.vertices().cmp(b.vertices()));
        out.push(loops);
    }
    if vertices.is_empty() {
        out = vec![Vec::new()];
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub decompositions: usize,
    pub sign_sum: i64,
    /// `(-1)^{C_F}`.
    pub expected: i64,
    /// Every loop satisfies `sign = (-1)^{vertex crossings + edge crossings}`.
    pub whitney_ok: bool,
    pub passed: bool,
}

/// Sums the sign products over all decompositions of `f` and compares the
/// result with the crossing parity of `f`.
pub fn verify_signed_decomposition(g: &EmbeddedGraph, f: &EdgeSet) -> Result<DecompositionReport> {
    let decompositions = decompose_even_subset(g, f)?;
    let mut sign_sum = 0;
    let mut whitney_ok = true;
    for d in &decompositions {
        let mut product = 1i64;
        for l in d {
            product *= l.sign() as i64;
            let (cv, ce) = self_crossings(g, l);
            whitney_ok &= l.sign() as i64 == if (cv + ce) % 2 == 0 { 1 } else { -1 };
        }
        sign_sum += product;
    }
    let expected = if crossing_count(g, f)? % 2 == 0 { 1 } else { -1 };
    Ok(DecompositionReport { decompositions: decompositions.len(), sign_sum, expected, whitney_ok, passed: whitney_ok && sign_sum == expected })
}

/// `sum over even F, over decompositions of F, of prod w(loop; x)`,
/// which equals the generating function.
pub fn decomposition_generating_function(g: &EmbeddedGraph, x: &EdgeWeights, limits: &Limits) -> Result<f64> {
    let mut z = 0.0;
    for f in enumerate_even_subsets(g, limits)? {
        for d in decompose_even_subset(g, &f)? {
            z += d.iter().map(|l| l.weight(g, x)).product::<f64>();
        }
    }
    Ok(z)
}

/// An ordered sequence of loops.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopConfiguration {
    pub loops: Vec<Loop>,
    pub total_length: usize,
    pub edge_disjoint: bool,
}

impl LoopConfiguration {
    pub fn new(g: &EmbeddedGraph, loops: Vec<Loop>) -> Self {
        let total_length = loops.iter().map(Loop::length).sum();
        let edge_disjoint = configuration_is_edge_disjoint(g, &loops);
        LoopConfiguration { loops, total_length, edge_disjoint }
    }

    /// `(1/s!) prod w(loop; x)`.
    pub fn weight(&self, g: &EmbeddedGraph, x: &EdgeWeights) -> f64 {
        let s = self.loops.len();
        self.loops.iter().map(|l| l.weight(g, x)).product::<f64>() / factorial(s)
    }

    /// Number of steps over each edge.
    pub fn edge_usage(&self, g: &EmbeddedGraph) -> Vec<usize> {
        let mut usage = vec![0; g.num_edges()];
        for l in &self.loops {
            for e in l.step_edges(g) {
                usage[e] += 1;
            }
        }
        usage
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn configuration_is_edge_disjoint(g: &EmbeddedGraph, loops: &[Loop]) -> bool {
    let mut seen = EdgeSet::empty(g.num_edges());
    for l in loops {
        for e in l.step_edges(g) {
            if seen.contains(e) {
                return false;
            }
            seen.insert(e);
        }
    }
    true
}

/// Every ordered sequence of loops whose lengths add up to `r`.
pub fn enumerate_configurations(g: &EmbeddedGraph, r: usize) -> Result<Vec<LoopConfiguration>> {
    if r > CONFIGURATION_MAX_LENGTH || g.num_edges() > CONFIGURATION_MAX_EDGES {
        return Err(Error::CapExceeded(format!(
            "configuration enumeration is limited to length {CONFIGURATION_MAX_LENGTH} on graphs with at most {CONFIGURATION_MAX_EDGES} edges"
        )));
    }
    let loops = enumerate_loops(g, LoopBound::Length(r), &LoopFilter::All)?;
    if loops.iter().any(|l| l.length() == 0) {
        return Err(Error::InvalidGraph("a loop of length zero makes the configuration sum infinite".into()));
    }
    fn extend(g: &EmbeddedGraph, loops: &[Loop], left: usize, current: &mut Vec<Loop>, out: &mut Vec<LoopConfiguration>) {
        if left == 0 {
            out.push(LoopConfiguration::new(g, current.clone()));
            return;
        }
        for l in loops.iter().filter(|l| l.length() <= left) {
            current.push(l.clone());
            extend(g, loops, left - l.length(), current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if r > 0 {
        extend(g, &loops, r, &mut Vec::new(), &mut out);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CancellationTerm {
    /// Loops as sequences of vertex positions.
    pub loops: Vec<String>,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CancellationReport {
    pub r: usize,
    pub configurations: usize,
    pub overlapping: usize,
    pub sum: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub terms: Vec<CancellationTerm>,
}

pub fn describe_loop(g: &EmbeddedGraph, l: &Loop) -> String {
    l.vertices()
        .iter()
        .map(|&v| {
            let (x, y) = g.position(v);
            format!("({x},{y})")
        })
        .join(" ")
}

fn cancellation_report(g: &EmbeddedGraph, r: usize, x: &EdgeWeights, configs: &[LoopConfiguration]) -> CancellationReport {
    let terms: Vec<CancellationTerm> = configs
        .iter()
        .filter(|c| !c.edge_disjoint)
        .map(|c| CancellationTerm { loops: c.loops.iter().map(|l| describe_loop(g, l)).collect(), factor: c.weight(g, x) })
        .collect();
    let sum: f64 = terms.iter().map(|t| t.factor).sum();
    let tolerance = 1e-12 * terms.len().max(1) as f64;
    CancellationReport { r, configurations: configs.len(), overlapping: terms.len(), sum, tolerance, passed: sum.abs() < tolerance, terms }
}

/// Signed sum over configurations of total length `r` that are not
/// edge-disjoint.
pub fn verify_cancellation(g: &EmbeddedGraph, r: usize, x: &EdgeWeights) -> Result<CancellationReport> {
    let configs = enumerate_configurations(g, r)?;
    Ok(cancellation_report(g, r, x, &configs))
}

/// Configurations of total length `r` that use each edge exactly as often
/// as `usage` prescribes.
pub fn configurations_with_usage(g: &EmbeddedGraph, r: usize, usage: &[usize]) -> Result<Vec<LoopConfiguration>> {
    Ok(enumerate_configurations(g, r)?.into_iter().filter(|c| c.edge_usage(g) == usage).collect())
}

/// Cancellation restricted to the configurations with the given edge usage.
pub fn verify_cancellation_on_usage(g: &EmbeddedGraph, r: usize, x: &EdgeWeights, usage: &[usize]) -> Result<CancellationReport> {
    let configs = configurations_with_usage(g, r, usage)?;
    Ok(cancellation_report(g, r, x, &configs))
}

/// `1 + sum_{r <= r_max}` over configurations of total length `r` of
/// `(1/s!) prod w`, optionally only over edge-disjoint ones.
pub fn configuration_sum(g: &EmbeddedGraph, x: &EdgeWeights, r_max: usize, edge_disjoint_only: bool) -> Result<f64> {
    let mut total = 1.0;
    for r in 1..=r_max {
        for c in enumerate_configurations(g, r)? {
            if c.edge_disjoint || !edge_disjoint_only {
                total += c.weight(g, x);
            }
        }
    }
    Ok(total)
}

/// A loop with a distinct label on every step, kept in canonical form.
///
/// Step `i` goes from `steps[i].0` to `steps[i + 1].0` and carries the
/// label `steps[i].1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledLoop {
    steps: Vec<(VertexId, u32)>,
}

fn rotate(steps: &[(VertexId, u32)], start: usize) -> Vec<(VertexId, u32)> {
    steps[start..].iter().chain(&steps[..start]).copied().collect()
}

/// The loop rotated (and reversed if needed) so that the step labelled
/// `label` comes first and leaves `from`.
fn oriented_from(steps: &[(VertexId, u32)], label: u32, from: VertexId) -> Vec<(VertexId, u32)> {
    let p = steps.iter().position(|s| s.1 == label).expect("label present");
    if steps[p].0 == from {
        return rotate(steps, p);
    }
    let reversed = reverse_representation(steps);
    let p = reversed.iter().position(|s| s.1 == label).expect("label present");
    rotate(&reversed, p)
}

/// The same labelled loop walked backwards.
fn reverse_representation(steps: &[(VertexId, u32)]) -> Vec<(VertexId, u32)> {
    let n = steps.len();
    (0..n).map(|j| (steps[(n - j) % n].0, steps[(2 * n - j - 1) % n].1)).collect()
}

impl LabelledLoop {
    /// Canonical form of any representation.
    pub fn new(g: &EmbeddedGraph, steps: Vec<(VertexId, u32)>) -> Result<Self> {
        let vertices: Vec<VertexId> = steps.iter().map(|s| s.0).collect();
        validate_closed_path(g, &vertices)?;
        if steps.iter().map(|s| s.1).collect::<BTreeSet<_>>().len() != steps.len() {
            return Err(Error::InvalidInput("labels on a loop must be distinct".into()));
        }
        let reversed = reverse_representation(&steps);
        let n = steps.len();
        let best = (0..n)
            .flat_map(|k| [rotate(&steps, k), rotate(&reversed, k)])
            .min()
            .expect("nonempty loop");
        Ok(LabelledLoop { steps: best })
    }

    pub fn steps(&self) -> &[(VertexId, u32)] {
        &self.steps
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        self.steps.iter().map(|s| s.0).collect()
    }

    pub fn base(&self, g: &EmbeddedGraph) -> Result<Loop> {
        canonicalize(g, &self.vertices())
    }

    pub fn sign(&self, g: &EmbeddedGraph) -> Result<i8> {
        closed_path_sign(g, &self.vertices())
    }

    /// `sign * prod x`, independent of the labels.
    pub fn weight(&self, g: &EmbeddedGraph, x: &EdgeWeights) -> Result<f64> {
        let l = self.base(g)?;
        Ok(self.sign(g)? as f64 * l.edge_product(g, x))
    }

    fn step_edge(&self, g: &EmbeddedGraph, i: usize) -> EdgeId {
        let n = self.steps.len();
        g.edge_between(self.steps[i].0, self.steps[(i + 1) % n].0).expect("validated loop")
    }
}

/// A set of labelled loops, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledConfiguration {
    pub loops: Vec<LabelledLoop>,
}

impl LabelledConfiguration {
    pub fn new(mut loops: Vec<LabelledLoop>) -> Self {
        loops.sort();
        LabelledConfiguration { loops }
    }

    pub fn steps(&self) -> usize {
        self.loops.iter().map(|l| l.steps.len()).sum()
    }

    pub fn sign(&self, g: &EmbeddedGraph) -> Result<i8> {
        let mut s = 1;
        for l in &self.loops {
            s *= l.sign(g)?;
        }
        Ok(s)
    }

    pub fn weight(&self, g: &EmbeddedGraph, x: &EdgeWeights) -> Result<f64> {
        let mut w = 1.0;
        for l in &self.loops {
            w *= l.weight(g, x)?;
        }
        Ok(w)
    }

    pub fn unlabelled(&self, g: &EmbeddedGraph) -> Result<Vec<Loop>> {
        let mut loops = self.loops.iter().map(|l| l.base(g)).collect::<Result<Vec<_>>>()?;
        loops.sort_by(|a, b| a.vertices().cmp(b.vertices()));
        Ok(loops)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BijectionCase {
    /// The two smallest labels on the first reused edge sit on different loops.
    Merge,
    /// Same loop, same direction.
    Split,
    /// Same loop, opposite directions.
    Reverse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BijectionImage {
    pub image: LabelledConfiguration,
    pub case: BijectionCase,
    /// For `Reverse`: winding of the open path `u, v, P1, v, u`, and the
    /// windings of the loop before and after.
    pub reverse_angles: Option<(f64, f64, f64)>,
}

/// The involution on labelled configurations that reuse an edge.
///
/// Takes the smallest label `a` on an edge carrying several labels and the
/// next label `b` on that edge, then merges two loops, splits one, or
/// reverses the stretch between `a` and `b`.
pub fn apply_bijection(g: &EmbeddedGraph, c: &LabelledConfiguration) -> Result<BijectionImage> {
    let mut on_edge: BTreeMap<EdgeId, Vec<(u32, usize, usize)>> = BTreeMap::new();
    for (li, l) in c.loops.iter().enumerate() {
        for (pos, &(_, label)) in l.steps.iter().enumerate() {
            on_edge.entry(l.step_edge(g, pos)).or_default().push((label, li, pos));
        }
    }
    let (a, li, _, edge) = on_edge
        .iter()
        .filter(|(_, sites)| sites.len() > 1)
        .flat_map(|(&e, sites)| sites.iter().map(move |&(label, li, pos)| (label, li, pos, e)))
        .min()
        .ok_or_else(|| Error::InvalidInput("labelled configuration is edge-disjoint".into()))?;
    let (b, lj, _) = on_edge[&edge].iter().copied().filter(|&(label, _, _)| label != a).min().expect("reused edge");
    // Connections are exchanged at the endpoint with the smaller id, so
    // the result does not depend on how the loops happen to be oriented.
    let e = g.edge(edge);
    let (u, v) = (e.u.min(e.v), e.u.max(e.v));
    let rep_i = oriented_from(&c.loops[li].steps, a, u);
    let others = c.loops.iter().enumerate().filter(|&(k, _)| k != li && k != lj).map(|(_, l)| l.clone());
    if li != lj {
        let rep_j = oriented_from(&c.loops[lj].steps, b, u);
        let merged = LabelledLoop::new(g, rep_i.into_iter().chain(rep_j).collect())?;
        let image = LabelledConfiguration::new(others.chain([merged]).collect());
        return Ok(BijectionImage { image, case: BijectionCase::Merge, reverse_angles: None });
    }
    let q = rep_i.iter().position(|s| s.1 == b).expect("label present");
    if rep_i[q].0 == u {
        let first = LabelledLoop::new(g, rep_i[..q].to_vec())?;
        let second = LabelledLoop::new(g, rep_i[q..].to_vec())?;
        let image = LabelledConfiguration::new(others.chain([first, second]).collect());
        return Ok(BijectionImage { image, case: BijectionCase::Split, reverse_angles: None });
    }
    let stretch = &rep_i[1..q];
    let k = stretch.len();
    let mut reversed_stretch = vec![(v, stretch[k - 1].1)];
    reversed_stretch.extend((1..k).map(|t| (stretch[k - t].0, stretch[k - t - 1].1)));
    let new_rep: Vec<(VertexId, u32)> = [rep_i[0]]
        .into_iter()
        .chain(reversed_stretch)
        .chain(rep_i[q..].iter().copied())
        .collect();
    let open: Vec<VertexId> = [u].into_iter().chain(stretch.iter().map(|s| s.0)).chain([v, u]).collect();
    let before = closed_winding(g, &rep_i.iter().map(|s| s.0).collect::<Vec<_>>())?;
    let after = closed_winding(g, &new_rep.iter().map(|s| s.0).collect::<Vec<_>>())?;
    let reversed = LabelledLoop::new(g, new_rep)?;
    let image = LabelledConfiguration::new(others.chain([reversed]).collect());
    Ok(BijectionImage { image, case: BijectionCase::Reverse, reverse_angles: Some((open_winding(g, &open)?, before, after)) })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BijectionAudit {
    pub max_steps: usize,
    /// Unlabelled configurations (as multisets of loops) visited.
    pub configurations: usize,
    pub labelled: usize,
    pub case1: usize,
    pub case2: usize,
    pub case3: usize,
    pub involution_ok: bool,
    pub sign_flips_ok: bool,
    pub weight_matches: bool,
    pub counts_ok: bool,
    pub case3_angles_ok: bool,
    pub labelled_weight_ok: bool,
    pub failures: Vec<String>,
}

impl BijectionAudit {
    fn fresh(max_steps: usize) -> Self {
        BijectionAudit {
            max_steps,
            involution_ok: true,
            sign_flips_ok: true,
            weight_matches: true,
            counts_ok: true,
            case3_angles_ok: true,
            labelled_weight_ok: true,
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.involution_ok && self.sign_flips_ok && self.weight_matches && self.counts_ok && self.case3_angles_ok && self.labelled_weight_ok
    }

    fn fail(&mut self, message: String) {
        if self.failures.len() < 10 {
            self.failures.push(message);
        }
    }

    fn check(&mut self, g: &EmbeddedGraph, x: &EdgeWeights, c: &LabelledConfiguration) -> Result<()> {
        let mapped = apply_bijection(g, c)?;
        match mapped.case {
            BijectionCase::Merge => self.case1 += 1,
            BijectionCase::Split => self.case2 += 1,
            BijectionCase::Reverse => self.case3 += 1,
        }
        let back = apply_bijection(g, &mapped.image)?;
        if back.image != *c || back.case == mapped.case && mapped.case != BijectionCase::Reverse {
            self.involution_ok = false;
            self.fail(format!("not an involution at {c:?}"));
        }
        let unlabelled = mapped.image.unlabelled(g)?;
        if configuration_is_edge_disjoint(g, &unlabelled) || mapped.image.steps() != c.steps() {
            self.involution_ok = false;
            self.fail(format!("image leaves the configuration set at {c:?}"));
        }
        if mapped.image.sign(g)? != -c.sign(g)? {
            self.sign_flips_ok = false;
            self.fail(format!("sign not flipped at {c:?}"));
        }
        let (w0, w1) = (c.weight(g, x)?, mapped.image.weight(g, x)?);
        if (w0.abs() - w1.abs()).abs() > 1e-12 * w0.abs().max(1e-300) {
            self.weight_matches = false;
            self.fail(format!("weight changed at {c:?}"));
        }
        if let Some((open, before, after)) = mapped.reverse_angles {
            let tau = std::f64::consts::TAU;
            let half_turn = (open - std::f64::consts::PI).rem_euclid(tau);
            let gap = (before - after - tau).rem_euclid(2.0 * tau);
            let near = |d: f64, period: f64| d.min(period - d) < 1e-9;
            if !near(half_turn, tau) || !near(gap, 2.0 * tau) {
                self.case3_angles_ok = false;
                self.fail(format!("reverse case angles {open}, {before}, {after} at {c:?}"));
            }
        }
        for l in &c.loops {
            let base = l.base(g)?;
            if (l.weight(g, x)? - base.multiplicity() as f64 * base.weight(g, x)).abs() > 1e-12 {
                self.labelled_weight_ok = false;
                self.fail(format!("labelled weight relation fails at {l:?}"));
            }
        }
        Ok(())
    }
}

/// `n! / (prod m(loop) prod k!)` for a sorted multiset of loops.
pub fn labelled_count(loops: &[Loop]) -> u64 {
    let n: usize = loops.iter().map(Loop::steps).sum();
    let mut denominator: u64 = loops.iter().map(|l| l.multiplicity() as u64).product();
    for (_, group) in &loops.iter().chunk_by(|l| l.vertices().to_vec()) {
        denominator *= (1..=group.count() as u64).product::<u64>();
    }
    (1..=n as u64).product::<u64>() / denominator
}

/// All labelled configurations over a multiset of loops, found by labelling
/// the steps in every order and merging equal results.
pub fn labelled_configurations(g: &EmbeddedGraph, loops: &[Loop]) -> Result<BTreeSet<LabelledConfiguration>> {
    let n: usize = loops.iter().map(Loop::steps).sum();
    let mut out = BTreeSet::new();
    for perm in (1..=n as u32).permutations(n) {
        let mut offset = 0;
        let mut labelled = Vec::with_capacity(loops.len());
        for l in loops {
            let steps = l.vertices().iter().copied().zip(perm[offset..offset + l.steps()].iter().copied()).collect();
            labelled.push(LabelledLoop::new(g, steps)?);
            offset += l.steps();
        }
        out.insert(LabelledConfiguration::new(labelled));
    }
    Ok(out)
}

/// Exhaustive audit of the involution over every labelled configuration
/// with at most `max_steps` steps that reuses an edge.
pub fn bijection_audit(g: &EmbeddedGraph, max_steps: usize) -> Result<BijectionAudit> {
    if max_steps > LABELLED_MAX_STEPS {
        return Err(Error::CapExceeded(format!("labelled enumeration is limited to {LABELLED_MAX_STEPS} steps")));
    }
    let loops = enumerate_loops(g, LoopBound::Steps(max_steps), &LoopFilter::All)?;
    let x = EdgeWeights::from_vec(g, (0..g.num_edges()).map(|e| 0.5 + 0.05 * (e % 7) as f64).collect())?;
    let mut audit = BijectionAudit::fresh(max_steps);
    for size in 1..=max_steps / 3 {
        for combo in (0..loops.len()).combinations_with_replacement(size) {
            let chosen: Vec<Loop> = combo.iter().map(|&i| loops[i].clone()).collect();
            if chosen.iter().map(Loop::steps).sum::<usize>() > max_steps || configuration_is_edge_disjoint(g, &chosen) {
                continue;
            }
            audit.configurations += 1;
            let set = labelled_configurations(g, &chosen)?;
            if set.len() as u64 != labelled_count(&chosen) {
                audit.counts_ok = false;
                audit.fail(format!("{} labellings of {:?}, expected {}", set.len(), combo, labelled_count(&chosen)));
            }
            audit.labelled += set.len();
            for c in &set {
                audit.check(g, &x, c)?;
            }
        }
    }
    Ok(audit)
}

/// Audits `samples` random labellings of one multiset of loops.
pub fn sampled_bijection_audit(g: &EmbeddedGraph, loops: &[Loop], samples: usize, seed: u64) -> Result<BijectionAudit> {
    if configuration_is_edge_disjoint(g, loops) {
        return Err(Error::InvalidInput("the loops do not reuse any edge".into()));
    }
    let n: usize = loops.iter().map(Loop::steps).sum();
    let x = EdgeWeights::from_vec(g, (0..g.num_edges()).map(|e| 0.5 + 0.05 * (e % 7) as f64).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = BijectionAudit::fresh(n);
    audit.configurations = 1;
    let mut labels: Vec<u32> = (1..=n as u32).collect();
    for _ in 0..samples {
        labels.shuffle(&mut rng);
        let mut offset = 0;
        let mut labelled = Vec::with_capacity(loops.len());
        for l in loops {
            let steps = l.vertices().iter().copied().zip(labels[offset..offset + l.steps()].iter().copied()).collect();
            labelled.push(LabelledLoop::new(g, steps)?);
            offset += l.steps();
        }
        audit.labelled += 1;
        audit.check(g, &x, &LabelledConfiguration::new(labelled))?;
    }
    Ok(audit)
}
