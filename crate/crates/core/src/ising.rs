//! Ising partition functions and correlations on lattice rectangles.
//!
//! Three independent routes are provided for each quantity: summing over
//! spin configurations, summing over even subgraphs of the primal or dual
//! graph, and the determinant or loop expansion of those generating
//! functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::even::generating_function_bruteforce;
use crate::geometry::Coordinate;
use crate::graph::{
    build_weak_dual, rectangle, EdgeId, EdgeKind, EdgeSet, EdgeWeights, EmbeddedGraph, GraphParts, LatticeBox, VertexId,
};
use crate::kac_ward::{build_transition_matrix, IMAGINARY_RESIDUE};
use crate::limits::Limits;
use crate::loops::{geometric_tail, length_sums, LoopFilter, LATTICE_NORM};
use crate::onsager::critical_beta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Free,
    /// Every vertex on the outer boundary is held at `+1`.
    Plus,
}

#[derive(Clone, Debug)]
pub struct IsingSpec {
    pub graph: EmbeddedGraph,
    pub beta: f64,
    pub boundary: Boundary,
}

impl IsingSpec {
    pub fn new(graph: EmbeddedGraph, beta: f64, boundary: Boundary) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
        }
        if graph.lattice_box().is_none() || graph.has_additional_edges() {
            return Err(Error::InvalidGraph("Ising models are defined on lattice rectangles".into()));
        }
        Ok(IsingSpec { graph, beta, boundary })
    }

    pub fn rectangle(width: usize, height: usize, beta: f64, boundary: Boundary) -> Result<Self> {
        IsingSpec::new(rectangle(width, height)?, beta, boundary)
    }

    pub fn lattice_box(&self) -> LatticeBox {
        self.graph.lattice_box().expect("checked on construction")
    }

    /// Spins summed over: all of them, or the interior ones under `Plus`.
    pub fn free_spins(&self) -> Vec<VertexId> {
        (0..self.graph.num_vertices())
            .filter(|&v| self.boundary == Boundary::Free || !self.graph.is_boundary(v))
            .collect()
    }

    /// The vertex at grid offset `(i, j)`.
    pub fn site(&self, i: usize, j: usize) -> Result<VertexId> {
        self.graph
            .grid_vertex(i, j)
            .ok_or_else(|| Error::InvalidInput(format!("site ({i}, {j}) is outside the rectangle")))
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.graph.num_vertices() {
            return Err(Error::InvalidInput(format!("vertex {v} is not in the graph")));
        }
        Ok(())
    }

    fn require(&self, boundary: Boundary) -> Result<()> {
        if self.boundary != boundary {
            return Err(Error::InvalidInput(format!("expected {boundary:?} boundary condition, got {:?}", self.boundary)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Partition,
    OnePoint(VertexId),
    TwoPoint(VertexId, VertexId),
}

/// How a generating function is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Sum over even subgraphs.
    Enumeration,
    /// Square root of `det(I - L)`, with the spectral radius certified.
    Determinant,
    /// Loop series truncated at the given length.
    LoopSeries { r_max: usize },
}

/// `Z` or an expectation, summing over every admissible spin configuration.
pub fn gibbs_bruteforce(spec: &IsingSpec, observable: Observable, limits: &Limits) -> Result<f64> {
    let g = &spec.graph;
    let free = spec.free_spins();
    if free.len() > limits.free_spins as usize {
        return Err(Error::CapExceeded(format!(
            "{} free spins exceed the Gibbs enumeration cap of {}",
            free.len(),
            limits.free_spins
        )));
    }
    match observable {
        Observable::Partition => {}
        Observable::OnePoint(u) => spec.check_vertex(u)?,
        Observable::TwoPoint(u, v) => {
            spec.check_vertex(u)?;
            spec.check_vertex(v)?;
        }
    }
    let m = g.num_edges() as i64;
    // Boltzmann factors indexed by the bond sum shifted to be nonnegative.
    let factor: Vec<f64> = (-m..=m).map(|s| (spec.beta * s as f64).exp()).collect();
    let mut spins = vec![1i8; g.num_vertices()];
    // Under the free condition each configuration is summed together with
    // its global flip, which has the same weight.
    let paired = spec.boundary == Boundary::Free && !free.is_empty();
    let summed = if paired { free.len() - 1 } else { free.len() };
    let (mut z, mut moment) = (0.0, 0.0);
    for mask in 0u64..1 << summed {
        for (k, &v) in free.iter().enumerate() {
            spins[v] = if mask >> k & 1 == 1 { -1 } else { 1 };
        }
        let s: i64 = g.edges().iter().map(|e| (spins[e.u] * spins[e.v]) as i64).sum();
        let w = factor[(s + m) as usize];
        let value = match observable {
            Observable::Partition => 1.0,
            Observable::OnePoint(_) if paired => 0.0,
            Observable::OnePoint(u) => spins[u] as f64,
            Observable::TwoPoint(u, v) => (spins[u] * spins[v]) as f64,
        };
        let copies = if paired { 2.0 } else { 1.0 };
        z += copies * w;
        moment += copies * w * value;
    }
    Ok(match observable {
        Observable::Partition => z,
        _ => moment / z,
    })
}

/// The generating function `Z_G(x)` by the chosen backend.
pub fn generating_function(g: &EmbeddedGraph, x: &EdgeWeights, backend: Backend, limits: &Limits) -> Result<f64> {
    match backend {
        Backend::Enumeration => generating_function_bruteforce(g, x, limits),
        Backend::Determinant => build_transition_matrix(g, x)?.determinant_evaluation(),
        Backend::LoopSeries { r_max } => {
            build_transition_matrix(g, x)?.certify_spectral_radius()?;
            Ok(length_sums(g, x, r_max, &LoopFilter::All)?.total().exp())
        }
    }
}

/// `2^|V| cosh(beta)^|E| Z_G(tanh beta)`.
pub fn high_temp_partition(spec: &IsingSpec, backend: Backend, limits: &Limits) -> Result<f64> {
    spec.require(Boundary::Free)?;
    let g = &spec.graph;
    let x = EdgeWeights::uniform(g, spec.beta.tanh());
    let z = generating_function(g, &x, backend, limits)?;
    Ok(2f64.powi(g.num_vertices() as i32) * spec.beta.cosh().powi(g.num_edges() as i32) * z)
}

/// The weak dual, or `None` when the rectangle has no bounded face.
fn dual_of(spec: &IsingSpec) -> Result<Option<EmbeddedGraph>> {
    let b = spec.lattice_box();
    if b.width < 2 || b.height < 2 {
        return Ok(None);
    }
    build_weak_dual(&spec.graph).map(Some)
}

/// `exp(beta |E|) Z_{G*}(exp(-2 beta))` on the weak dual.
pub fn low_temp_partition(spec: &IsingSpec, backend: Backend, limits: &Limits) -> Result<f64> {
    spec.require(Boundary::Plus)?;
    let z = match dual_of(spec)? {
        Some(dual) => {
            let x = EdgeWeights::uniform(&dual, (-2.0 * spec.beta).exp());
            generating_function(&dual, &x, backend, limits)?
        }
        None => 1.0,
    };
    Ok((spec.beta * spec.graph.num_edges() as f64).exp() * z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    High,
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergySeries {
    pub value: f64,
    pub tail: f64,
    pub phase: Phase,
    /// Loop weight per site at each length, index `r`.
    pub per_length: Vec<f64>,
}

/// Truncated loop expansion of `-beta f(beta)`.
///
/// Loops are anchored at the centre of a `(2h+1)`-square box, which holds
/// every anchored loop of length at most `2h`.
pub fn free_energy_series(beta: f64, half_width: usize, r_max: usize) -> Result<FreeEnergySeries> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
    }
    if half_width < r_max {
        return Err(Error::InvalidInput(format!("box half-width {half_width} is smaller than r_max {r_max}")));
    }
    let (phase, x, base) = if beta < critical_beta() {
        (Phase::High, beta.tanh(), (2.0 * beta.cosh().powi(2)).ln())
    } else {
        (Phase::Low, (-2.0 * beta).exp(), 2.0 * beta)
    };
    let q = LATTICE_NORM * x;
    if !(q < 1.0) {
        return Err(Error::Domain(format!("loop series does not converge at beta = {beta}")));
    }
    let side = 2 * half_width + 1;
    let g = rectangle(side, side)?;
    let centre = g.grid_vertex(half_width, half_width).expect("centre of the box");
    let sums = length_sums(&g, &EdgeWeights::uniform(&g, x), r_max, &LoopFilter::AnchoredAt(centre))?;
    Ok(FreeEnergySeries { value: base + sums.total(), tail: geometric_tail(2.0, q, r_max), phase, per_length: sums.sums })
}

/// Order of the two legs of an L-shaped path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathOrder {
    #[default]
    HorizontalFirst,
    VerticalFirst,
}

/// Points from `a` to `b` on the lattice of spacing `step`, one leg per axis.
fn l_path(a: Coordinate, b: Coordinate, step: i64, order: PathOrder) -> Vec<Coordinate> {
    let mut out = vec![a];
    let mut p = a;
    let walk_x = |p: &mut Coordinate, out: &mut Vec<Coordinate>| {
        while p.x != b.x {
            p.x += step * (b.x - p.x).signum();
            out.push(*p);
        }
    };
    let walk_y = |p: &mut Coordinate, out: &mut Vec<Coordinate>| {
        while p.y != b.y {
            p.y += step * (b.y - p.y).signum();
            out.push(*p);
        }
    };
    match order {
        PathOrder::HorizontalFirst => {
            walk_x(&mut p, &mut out);
            walk_y(&mut p, &mut out);
        }
        PathOrder::VerticalFirst => {
            walk_y(&mut p, &mut out);
            walk_x(&mut p, &mut out);
        }
    }
    out
}

/// Dual edges crossing the consecutive edges of a primal lattice path.
fn dual_edges_across(g: &EmbeddedGraph, dual: &EmbeddedGraph, path: &[Coordinate]) -> EdgeSet {
    let half = g.denominator() / 2;
    let mut set = EdgeSet::empty(dual.num_edges());
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = Coordinate::new((a.x + b.x) / 2, (a.y + b.y) / 2);
        let (p, q) = if a.y == b.y {
            (mid.offset(0, -half), mid.offset(0, half))
        } else {
            (mid.offset(-half, 0), mid.offset(half, 0))
        };
        if let (Some(p), Some(q)) = (dual.vertex_at(p), dual.vertex_at(q)) {
            set.insert(dual.edge_between(p, q).expect("adjacent faces share a dual edge"));
        }
    }
    set
}

/// `<s_u s_v>` under the plus boundary condition, as `Z_{G*}(x')/Z_{G*}(x)`
/// with `x'` negated on dual edges crossing an L-shaped primal path.
///
/// The loop-series backend returns `exp(-2 sum_r f_r)` over dual loops
/// crossing the path an odd number of times.
pub fn two_point_plus(spec: &IsingSpec, u: VertexId, v: VertexId, backend: Backend, limits: &Limits) -> Result<f64> {
    two_point_plus_with_path(spec, u, v, PathOrder::default(), backend, limits)
}

pub fn two_point_plus_with_path(
    spec: &IsingSpec,
    u: VertexId,
    v: VertexId,
    order: PathOrder,
    backend: Backend,
    limits: &Limits,
) -> Result<f64> {
    spec.require(Boundary::Plus)?;
    spec.check_vertex(u)?;
    spec.check_vertex(v)?;
    if u == v {
        return Err(Error::InvalidInput("two-point function needs distinct vertices".into()));
    }
    let g = &spec.graph;
    if g.is_boundary(u) && g.is_boundary(v) {
        return Ok(1.0);
    }
    let dual = dual_of(spec)?.expect("an interior vertex implies bounded faces");
    let x = EdgeWeights::uniform(&dual, (-2.0 * spec.beta).exp());
    let path = l_path(g.coord(u), g.coord(v), g.denominator(), order);
    let flipped = dual_edges_across(g, &dual, &path);
    if let Backend::LoopSeries { r_max } = backend {
        build_transition_matrix(&dual, &x)?.certify_spectral_radius()?;
        let odd = length_sums(&dual, &x, r_max, &LoopFilter::OddOn(flipped))?;
        return Ok((-2.0 * odd.total()).exp());
    }
    let mut flipped_weights = x.clone();
    for e in flipped.iter() {
        flipped_weights.set(e, -x.get(e));
    }
    Ok(generating_function(&dual, &flipped_weights, backend, limits)? / generating_function(&dual, &x, backend, limits)?)
}

/// `<s_u>` under the plus boundary condition, paired with the boundary
/// vertex at the left end of `u`'s row.
pub fn one_point_plus(spec: &IsingSpec, u: VertexId, backend: Backend, limits: &Limits) -> Result<f64> {
    spec.check_vertex(u)?;
    let (_, j) = spec.graph.grid_offset(u).expect("rectangle vertex");
    one_point_plus_via(spec, u, spec.site(0, j)?, backend, limits)
}

/// `<s_u>` computed as `<s_u s_w>` for the boundary vertex `w`.
pub fn one_point_plus_via(spec: &IsingSpec, u: VertexId, w: VertexId, backend: Backend, limits: &Limits) -> Result<f64> {
    spec.require(Boundary::Plus)?;
    spec.check_vertex(u)?;
    spec.check_vertex(w)?;
    if spec.graph.is_boundary(u) {
        return Ok(1.0);
    }
    if !spec.graph.is_boundary(w) {
        return Err(Error::InvalidInput("the partner of a one-point function must be a boundary vertex".into()));
    }
    two_point_plus(spec, u, w, backend, limits)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignFlipReport {
    pub configurations: u64,
    pub max_residual: f64,
}

/// Checks `s_u s_v prod_{F} x_e = prod_{F} x'_e` for every plus-boundary
/// configuration, `F` being the dual edges across disagreeing bonds.
pub fn sign_flip_check(spec: &IsingSpec, u: VertexId, v: VertexId, limits: &Limits) -> Result<SignFlipReport> {
    spec.require(Boundary::Plus)?;
    spec.check_vertex(u)?;
    spec.check_vertex(v)?;
    let g = &spec.graph;
    let free = spec.free_spins();
    if free.len() > limits.free_spins as usize {
        return Err(Error::CapExceeded(format!("{} free spins exceed the cap of {}", free.len(), limits.free_spins)));
    }
    let Some(dual) = dual_of(spec)? else {
        return Ok(SignFlipReport { configurations: 1, max_residual: 0.0 });
    };
    let x = (-2.0 * spec.beta).exp();
    let flipped = dual_edges_across(g, &dual, &l_path(g.coord(u), g.coord(v), g.denominator(), PathOrder::default()));
    let crossing: Vec<Option<EdgeId>> = g
        .edges()
        .iter()
        .map(|e| {
            let set = dual_edges_across(g, &dual, &[g.coord(e.u), g.coord(e.v)]);
            let first = set.iter().next();
            first
        })
        .collect();
    let mut spins = vec![1i8; g.num_vertices()];
    let mut max_residual: f64 = 0.0;
    for mask in 0u64..1 << free.len() {
        for (k, &w) in free.iter().enumerate() {
            spins[w] = if mask >> k & 1 == 1 { -1 } else { 1 };
        }
        let (mut plain, mut signed) = (1.0, 1.0);
        for (e, edge) in g.edges().iter().enumerate() {
            if spins[edge.u] != spins[edge.v] {
                let d = crossing[e].ok_or_else(|| Error::Numerical("boundary bond disagrees under plus boundary".into()))?;
                plain *= x;
                signed *= if flipped.contains(d) { -x } else { x };
            }
        }
        let lhs = (spins[u] * spins[v]) as f64 * plain;
        max_residual = max_residual.max((lhs - signed).abs());
    }
    Ok(SignFlipReport { configurations: 1 << free.len(), max_residual })
}

/// Attachment of `u` and `v` to the dual lattice for the free two-point
/// function: face centres `u*`, `v*` diagonally adjacent to them and a
/// self-avoiding dual path `gamma` from `u*` to `v*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPathConfig {
    pub u: VertexId,
    pub v: VertexId,
    pub u_star: Coordinate,
    pub v_star: Coordinate,
    /// Face centres from `u*` to `v*` inclusive.
    pub gamma: Vec<Coordinate>,
}

/// Face-centre offsets tried in order when picking `u*`, in half units.
const STAR_OFFSETS: [(i64, i64); 4] = [(1, 1), (-1, 1), (1, -1), (-1, -1)];

/// Graph `G_gamma`: the lattice plus the chain `u u* gamma v* v` of
/// additional edges.
#[derive(Clone, Debug)]
pub struct AugmentedGraph {
    pub graph: EmbeddedGraph,
    /// The edge `u u*`, which carries the parameter `t`.
    pub source_edge: EdgeId,
    pub chain: EdgeSet,
    /// Lattice edges crossed by `gamma`.
    pub flipped: EdgeSet,
}

impl AugmentedGraph {
    /// Weights `x'(t)`: `x` on lattice edges, `-x` on those crossing
    /// `gamma`, `1` along the chain and `t` on `u u*`.
    pub fn weights(&self, x: f64, t: f64) -> EdgeWeights {
        let values = (0..self.graph.num_edges())
            .map(|e| {
                if e == self.source_edge {
                    t
                } else if self.chain.contains(e) {
                    1.0
                } else if self.flipped.contains(e) {
                    -x
                } else {
                    x
                }
            })
            .collect();
        EdgeWeights::from_vec(&self.graph, values).expect("one weight per edge")
    }
}

impl DualPathConfig {
    pub fn new(g: &EmbeddedGraph, u: VertexId, v: VertexId) -> Result<Self> {
        Self::with_order(g, u, v, PathOrder::default())
    }

    pub fn with_order(g: &EmbeddedGraph, u: VertexId, v: VertexId, order: PathOrder) -> Result<Self> {
        Self::with_stars(g, u, v, Self::default_star(g, u)?, Self::default_star(g, v)?, order)
    }

    /// First of the diagonal face centres of `w` lying inside the rectangle.
    pub fn default_star(g: &EmbeddedGraph, w: VertexId) -> Result<Coordinate> {
        Self::star_candidates(g, w)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidInput("rectangle has no bounded faces".into()))
    }

    /// All face centres diagonally adjacent to `w`, in preference order.
    pub fn star_candidates(g: &EmbeddedGraph, w: VertexId) -> Result<Vec<Coordinate>> {
        let b = g.lattice_box().ok_or_else(|| Error::InvalidGraph("expected a lattice rectangle".into()))?;
        if w >= g.num_vertices() {
            return Err(Error::InvalidInput(format!("vertex {w} is not in the graph")));
        }
        let d = g.denominator();
        let half = d / 2;
        let (lo, hi) = (b.origin, b.origin.offset((b.width as i64 - 1) * d, (b.height as i64 - 1) * d));
        let c = g.coord(w);
        Ok(STAR_OFFSETS
            .iter()
            .map(|&(dx, dy)| c.offset(dx * half, dy * half))
            .filter(|p| p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y)
            .collect())
    }

    pub fn with_stars(
        g: &EmbeddedGraph,
        u: VertexId,
        v: VertexId,
        u_star: Coordinate,
        v_star: Coordinate,
        order: PathOrder,
    ) -> Result<Self> {
        if u == v {
            return Err(Error::InvalidInput("two-point function needs distinct vertices".into()));
        }
        for (w, star) in [(u, u_star), (v, v_star)] {
            if !Self::star_candidates(g, w)?.contains(&star) {
                return Err(Error::InvalidInput(format!("{star:?} is not a face centre next to vertex {w}")));
            }
        }
        let gamma = l_path(u_star, v_star, g.denominator(), order);
        Ok(DualPathConfig { u, v, u_star, v_star, gamma })
    }

    /// Builds `G_gamma` from the rectangle `g`.
    pub fn augmented(&self, g: &EmbeddedGraph) -> Result<AugmentedGraph> {
        let mut parts: GraphParts = g.to_parts();
        let mut next_label = parts.vertices.iter().map(|&(l, _)| l).max().unwrap_or(-1) + 1;
        let mut chain_labels = vec![g.label(self.u)];
        for &p in &self.gamma {
            parts.vertices.push((next_label, p));
            chain_labels.push(next_label);
            next_label += 1;
        }
        chain_labels.push(g.label(self.v));
        for w in chain_labels.windows(2) {
            parts.edges.push((w[0], w[1], EdgeKind::Additional));
        }
        let graph = EmbeddedGraph::from_parts(&parts)?;
        let at = |c: Coordinate| graph.vertex_at(c).expect("augmented vertex");
        let chain_vertices: Vec<VertexId> = std::iter::once(g.coord(self.u))
            .chain(self.gamma.iter().copied())
            .chain(std::iter::once(g.coord(self.v)))
            .map(at)
            .collect();
        let chain_edges: Vec<EdgeId> = chain_vertices
            .windows(2)
            .map(|w| graph.edge_between(w[0], w[1]).expect("chain edge"))
            .collect();
        let chain = EdgeSet::from_edges(graph.num_edges(), chain_edges.iter().copied());
        let gamma_edges = &chain_edges[1..chain_edges.len() - 1];
        let flipped = EdgeSet::from_edges(
            graph.num_edges(),
            (0..graph.num_edges()).filter(|&e| !chain.contains(e) && gamma_edges.iter().any(|&c| graph.edges_cross(e, c))),
        );
        Ok(AugmentedGraph { graph, source_edge: chain_edges[0], chain, flipped })
    }
}

fn real_part(z: num_complex::Complex64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE * z.norm().max(1.0) {
        return Err(Error::Numerical(format!("determinant {z} is not real")));
    }
    Ok(z.re)
}

/// `Z_{G_gamma}(x'(t))` by enumeration.
pub fn augmented_partition(spec: &IsingSpec, cfg: &DualPathConfig, t: f64, limits: &Limits) -> Result<f64> {
    let aug = cfg.augmented(&spec.graph)?;
    generating_function_bruteforce(&aug.graph, &aug.weights(spec.beta.tanh(), t), limits)
}

/// `<s_u s_v>` under the free boundary condition, as the coefficient of
/// `t` in the affine function `Z_{G_gamma}(x'(t))` divided by `Z_G(x)`.
///
/// The determinant backend squares the affine function: with
/// `Z(t) = a + c t` and `det(t) = Z(t)^2`, `c = (det(1) - det(-1)) / (4a)`,
/// where `a` is certified positive. The loop-series backend uses the loops
/// through `u u*` exactly once, times `Z_G(x')/Z_G(x)`.
pub fn two_point_free(spec: &IsingSpec, cfg: &DualPathConfig, backend: Backend, limits: &Limits) -> Result<f64> {
    spec.require(Boundary::Free)?;
    spec.check_vertex(cfg.u)?;
    spec.check_vertex(cfg.v)?;
    let g = &spec.graph;
    let x = spec.beta.tanh();
    let aug = cfg.augmented(g)?;
    let base = EdgeWeights::uniform(g, x);
    match backend {
        Backend::Enumeration => {
            let one = generating_function_bruteforce(&aug.graph, &aug.weights(x, 1.0), limits)?;
            let zero = generating_function_bruteforce(&aug.graph, &aug.weights(x, 0.0), limits)?;
            Ok((one - zero) / generating_function_bruteforce(g, &base, limits)?)
        }
        Backend::Determinant => {
            let a = build_transition_matrix(&aug.graph, &aug.weights(x, 0.0))?.determinant_evaluation()?;
            let plus = real_part(build_transition_matrix(&aug.graph, &aug.weights(x, 1.0))?.determinant())?;
            let minus = real_part(build_transition_matrix(&aug.graph, &aug.weights(x, -1.0))?.determinant())?;
            let z = build_transition_matrix(g, &base)?.determinant_evaluation()?;
            Ok((plus - minus) / (4.0 * a * z))
        }
        Backend::LoopSeries { r_max } => {
            let a = build_transition_matrix(&aug.graph, &aug.weights(x, 0.0))?.determinant_evaluation()?;
            let z = build_transition_matrix(g, &base)?.determinant_evaluation()?;
            let once = length_sums(&aug.graph, &aug.weights(x, 1.0), r_max, &LoopFilter::MarkedOnce(aug.source_edge))?;
            Ok(once.total() * a / z)
        }
    }
}

/// `16 sum_{r >= d} q^r` with `q = tanh(beta) / tanh(beta_c)`.
pub fn decay_bound(beta: f64, distance: usize) -> Result<f64> {
    let q = beta.tanh() / critical_beta().tanh();
    if !(beta > 0.0) || !(q < 1.0) {
        return Err(Error::Domain(format!("decay bound needs 0 < beta < beta_c, got {beta}")));
    }
    Ok(16.0 * q.powi(distance as i32) / (1.0 - q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub size: usize,
    pub u: (usize, usize),
    pub v: (usize, usize),
    pub distance: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub beta: f64,
    pub rows: Vec<DecayRow>,
    pub violations: usize,
    /// Smallest `bound - value` over all rows.
    pub min_margin: f64,
}

/// Free-boundary two-point functions on `n x n` boxes for every pair at
/// L1 distance `1..=max_distance`, compared with the decay bound.
pub fn decay_bound_check(beta: f64, sizes: &[usize], max_distance: usize, backend: Backend, limits: &Limits) -> Result<DecayReport> {
    let mut rows = Vec::new();
    for &n in sizes {
        let spec = IsingSpec::rectangle(n, n, beta, Boundary::Free)?;
        for u in 0..spec.graph.num_vertices() {
            for v in u + 1..spec.graph.num_vertices() {
                let (a, b) = (spec.graph.grid_offset(u).expect("grid"), spec.graph.grid_offset(v).expect("grid"));
                let distance = a.0.abs_diff(b.0) + a.1.abs_diff(b.1);
                if distance > max_distance {
                    continue;
                }
                let cfg = DualPathConfig::new(&spec.graph, u, v)?;
                let value = two_point_free(&spec, &cfg, backend, limits)?;
                rows.push(DecayRow { size: n, u: a, v: b, distance, value, bound: decay_bound(beta, distance)? });
            }
        }
    }
    let violations = rows.iter().filter(|r| !(r.value >= -1e-12 && r.value <= r.bound)).count();
    let min_margin = rows.iter().map(|r| r.bound - r.value).fold(f64::INFINITY, f64::min);
    Ok(DecayReport { beta, rows, violations, min_margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn two_by_two_free_partition() {
        let beta: f64 = 0.37;
        let spec = IsingSpec::rectangle(2, 2, beta, Boundary::Free).unwrap();
        let want = 16.0 * beta.cosh().powi(4) * (1.0 + beta.tanh().powi(4));
        let gibbs = gibbs_bruteforce(&spec, Observable::Partition, &limits()).unwrap();
        assert!((gibbs - want).abs() < 1e-12 * want);
        let ht = high_temp_partition(&spec, Backend::Enumeration, &limits()).unwrap();
        assert!((ht - want).abs() < 1e-12 * want);
    }

    #[test]
    fn plus_two_by_two_is_frozen() {
        let spec = IsingSpec::rectangle(2, 2, 0.8, Boundary::Plus).unwrap();
        let z = gibbs_bruteforce(&spec, Observable::Partition, &limits()).unwrap();
        assert!((z - (3.2f64).exp()).abs() < 1e-12);
        assert!((low_temp_partition(&spec, Backend::Enumeration, &limits()).unwrap() - z).abs() < 1e-12);
    }

    #[test]
    fn free_one_point_vanishes() {
        let spec = IsingSpec::rectangle(3, 2, 0.5, Boundary::Free).unwrap();
        for u in 0..6 {
            assert_eq!(gibbs_bruteforce(&spec, Observable::OnePoint(u), &limits()).unwrap(), 0.0);
        }
    }

    #[test]
    fn gibbs_cap() {
        let spec = IsingSpec::rectangle(5, 5, 0.5, Boundary::Free).unwrap();
        assert!(gibbs_bruteforce(&spec, Observable::Partition, &limits()).unwrap_err().is_cap());
    }

    #[test]
    fn plus_ratio_on_three_by_three() {
        let spec = IsingSpec::rectangle(3, 3, 0.7, Boundary::Plus).unwrap();
        let centre = spec.site(1, 1).unwrap();
        let corner = spec.site(0, 0).unwrap();
        let gibbs = gibbs_bruteforce(&spec, Observable::TwoPoint(centre, corner), &limits()).unwrap();
        // One free spin: <s> = tanh(4 beta).
        assert!((gibbs - (2.8f64).tanh()).abs() < 1e-12);
        for backend in [Backend::Enumeration, Backend::Determinant] {
            let ratio = two_point_plus(&spec, centre, corner, backend, &limits()).unwrap();
            assert!((ratio - gibbs).abs() < 1e-12, "{backend:?}");
        }
        assert_eq!(two_point_plus(&spec, corner, spec.site(2, 2).unwrap(), Backend::Enumeration, &limits()).unwrap(), 1.0);
        assert!(two_point_plus(&spec, centre, centre, Backend::Enumeration, &limits()).is_err());
    }

    #[test]
    fn augmented_graph_shape() {
        let g = rectangle(3, 3).unwrap();
        let u = g.grid_vertex(0, 0).unwrap();
        let v = g.grid_vertex(2, 2).unwrap();
        let cfg = DualPathConfig::new(&g, u, v).unwrap();
        assert_eq!(cfg.u_star, Coordinate::new(1, 1));
        assert_eq!(cfg.v_star, Coordinate::new(3, 3));
        assert_eq!(cfg.gamma.len(), 3);
        let aug = cfg.augmented(&g).unwrap();
        assert_eq!(aug.chain.len(), 4);
        assert_eq!(aug.flipped.len(), 2);
        assert_eq!(aug.graph.num_vertices(), 12);
    }

    #[test]
    fn adjacent_pair_needs_no_dual_path() {
        let spec = IsingSpec::rectangle(2, 2, 0.4, Boundary::Free).unwrap();
        let (u, v) = (spec.site(0, 0).unwrap(), spec.site(1, 0).unwrap());
        let cfg = DualPathConfig::new(&spec.graph, u, v).unwrap();
        assert_eq!(cfg.u_star, cfg.v_star);
        assert!(cfg.augmented(&spec.graph).unwrap().flipped.is_empty());
        let gibbs = gibbs_bruteforce(&spec, Observable::TwoPoint(u, v), &limits()).unwrap();
        for backend in [Backend::Enumeration, Backend::Determinant] {
            let value = two_point_free(&spec, &cfg, backend, &limits()).unwrap();
            assert!((value - gibbs).abs() < 1e-12, "{backend:?}: {value} vs {gibbs}");
        }
    }

    #[test]
    fn free_two_point_on_three_by_three() {
        let spec = IsingSpec::rectangle(3, 3, 0.35, Boundary::Free).unwrap();
        let (u, v) = (spec.site(0, 0).unwrap(), spec.site(2, 2).unwrap());
        let gibbs = gibbs_bruteforce(&spec, Observable::TwoPoint(u, v), &limits()).unwrap();
        let cfg = DualPathConfig::new(&spec.graph, u, v).unwrap();
        let enumerated = two_point_free(&spec, &cfg, Backend::Enumeration, &limits()).unwrap();
        assert!((enumerated - gibbs).abs() < 1e-12);
        let det = two_point_free(&spec, &cfg, Backend::Determinant, &limits()).unwrap();
        assert!((det - gibbs).abs() < 1e-9);
    }

    #[test]
    fn affine_in_t() {
        let spec = IsingSpec::rectangle(3, 3, 0.3, Boundary::Free).unwrap();
        let cfg = DualPathConfig::new(&spec.graph, spec.site(0, 1).unwrap(), spec.site(2, 0).unwrap()).unwrap();
        let z: Vec<f64> = [0.0, 0.5, 1.0].iter().map(|&t| augmented_partition(&spec, &cfg, t, &limits()).unwrap()).collect();
        assert!((z[1] - 0.5 * (z[0] + z[2])).abs() < 1e-12);
    }

    #[test]
    fn sign_flip_identity() {
        let spec = IsingSpec::rectangle(4, 4, 0.6, Boundary::Plus).unwrap();
        let report = sign_flip_check(&spec, spec.site(1, 1).unwrap(), spec.site(3, 2).unwrap(), &limits()).unwrap();
        assert_eq!(report.configurations, 16);
        assert!(report.max_residual < 1e-15);
    }

    #[test]
    fn series_first_terms() {
        let s = free_energy_series(0.2, 4, 4).unwrap();
        let x = 0.2f64.tanh();
        assert_eq!(s.phase, Phase::High);
        assert!((s.per_length[4] - x.powi(4)).abs() < 1e-15);
        assert_eq!(s.per_length[2], 0.0);
        assert!(free_energy_series(critical_beta(), 4, 4).is_err());
        assert!(free_energy_series(0.2, 3, 4).is_err());
    }

    #[test]
    fn decay_bound_values() {
        let q = 0.3f64.tanh() / critical_beta().tanh();
        assert!((decay_bound(0.3, 2).unwrap() - 16.0 * q * q / (1.0 - q)).abs() < 1e-12);
        assert!(decay_bound(0.5, 1).is_err());
    }
}
