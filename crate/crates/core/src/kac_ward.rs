//! The transition matrix on directed representative edges and its
//! determinant.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::turning_angle;
use crate::graph::{EdgeWeights, EmbeddedGraph, VertexId};
use crate::loops::{LoopSeriesAccumulator, LATTICE_NORM};

/// Relative size of the imaginary part tolerated in `det(I - L)`.
pub const IMAGINARY_RESIDUE: f64 = 1e-9;

/// Largest power `2^k` tried when bounding the spectral radius through
/// norms of matrix powers.
const MAX_SQUARINGS: u32 = 14;

/// A chain of additional edges leaving a vertex: the walk `start, .., end`.
#[derive(Clone, Debug)]
struct Chain {
    vertices: Vec<VertexId>,
    weight: f64,
}

fn chains_from(g: &EmbeddedGraph, x: &EdgeWeights, start: VertexId) -> Vec<Chain> {
    let mut out = Vec::new();
    let mut stack = vec![Chain { vertices: vec![start], weight: 1.0 }];
    while let Some(chain) = stack.pop() {
        let last = *chain.vertices.last().expect("nonempty");
        let before = chain.vertices.len().checked_sub(2).map(|i| chain.vertices[i]);
        for &(w, e) in g.neighbors(last) {
            if g.edge(e).is_representative() || Some(w) == before {
                continue;
            }
            let mut vertices = chain.vertices.clone();
            vertices.push(w);
            let next = Chain { vertices, weight: chain.weight * x.get(e) };
            out.push(next.clone());
            stack.push(next);
        }
    }
    out
}

/// How `rho(L) < 1` was established.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SpectralCertificate {
    /// `(sqrt 2 + 1) * max |x_e| < 1` on a lattice rectangle.
    LatticeNormBound(f64),
    /// `||L^p||_F < 1` for the recorded power `p`; the bound is `||L^p||_F^{1/p}`.
    PowerNorm { power: u64, bound: f64 },
}

impl SpectralCertificate {
    pub fn bound(&self) -> f64 {
        match *self {
            SpectralCertificate::LatticeNormBound(b) => b,
            SpectralCertificate::PowerNorm { bound, .. } => bound,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    index: Vec<(VertexId, VertexId)>,
    position: HashMap<(VertexId, VertexId), usize>,
    entries: DMatrix<Complex64>,
    lattice_bound: Option<f64>,
}

/// Builds the matrix with entry `x_uv * (chain weights) * exp(i angle / 2)`
/// from `u -> v` to `w -> z` whenever `v = w`, `u != z`, or `v` reaches `w`
/// along additional edges, the angle being the total turn from `v - u` to
/// `z - w`.
pub fn build_transition_matrix(g: &EmbeddedGraph, x: &EdgeWeights) -> Result<TransitionMatrix> {
    if x.len() != g.num_edges() {
        return Err(Error::InvalidInput("weight vector does not match the graph".into()));
    }
    let mut index = Vec::new();
    for e in g.edges().iter().filter(|e| e.is_representative()) {
        index.push((e.u, e.v));
        index.push((e.v, e.u));
    }
    index.sort();
    let position: HashMap<_, _> = index.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let dim = index.len();
    let mut entries = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));

    let outgoing = |w: VertexId| {
        g.neighbors(w)
            .iter()
            .filter(|&&(_, e)| g.edge(e).is_representative())
            .map(|&(z, _)| z)
            .collect::<Vec<_>>()
    };
    let mut chain_cache: HashMap<VertexId, Vec<Chain>> = HashMap::new();

    for (row, &(u, v)) in index.iter().enumerate() {
        let x_uv = x.get(g.edge_between(u, v).expect("indexed edge"));
        for z in outgoing(v) {
            if z == u {
                continue;
            }
            let angle = turning_angle(g.coord(u), g.coord(v), g.coord(z))?;
            entries[(row, position[&(v, z)])] = Complex64::from_polar(x_uv, 0.5 * angle);
        }
        let chains = chain_cache.entry(v).or_insert_with(|| chains_from(g, x, v));
        for chain in chains.iter() {
            let c = &chain.vertices;
            let w = *c.last().expect("nonempty");
            let mut inner = turning_angle(g.coord(u), g.coord(v), g.coord(c[1]))?;
            for k in 1..c.len() - 1 {
                inner += turning_angle(g.coord(c[k - 1]), g.coord(c[k]), g.coord(c[k + 1]))?;
            }
            let before_w = c[c.len() - 2];
            for z in outgoing(w) {
                let angle = inner + turning_angle(g.coord(before_w), g.coord(w), g.coord(z))?;
                let col = position[&(w, z)];
                if entries[(row, col)] != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidGraph("two chain links produce the same transition".into()));
                }
                entries[(row, col)] = Complex64::from_polar(x_uv * chain.weight, 0.5 * angle);
            }
        }
    }

    let lattice_bound = g.lattice_box().map(|_| LATTICE_NORM * x.sup_norm());
    Ok(TransitionMatrix { index, position, entries, lattice_bound })
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Directed representative edges in row/column order.
    pub fn index(&self) -> &[(VertexId, VertexId)] {
        &self.index
    }

    pub fn position(&self, from: VertexId, to: VertexId) -> Option<usize> {
        self.position.get(&(from, to)).copied()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Entry from directed edge `a` to directed edge `b`.
    pub fn entry(&self, a: (VertexId, VertexId), b: (VertexId, VertexId)) -> Option<Complex64> {
        Some(self.entries[(self.position(a.0, a.1)?, self.position(b.0, b.1)?)])
    }

    /// `(sqrt 2 + 1) ||x||_inf` when the graph is a lattice rectangle.
    pub fn lattice_norm_bound(&self) -> Option<f64> {
        self.lattice_bound
    }

    /// `det(I - L)` by LU factorisation with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim();
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        (DMatrix::identity(n, n) - &self.entries).lu().determinant()
    }

    /// Establishes `rho(L) < 1`: first by the lattice norm bound, then by
    /// Frobenius norms of `L^(2^k)`, which bound `rho^(2^k)` from above.
    pub fn certify_spectral_radius(&self) -> Result<SpectralCertificate> {
        if let Some(b) = self.lattice_bound.filter(|&b| b < 1.0) {
            return Ok(SpectralCertificate::LatticeNormBound(b));
        }
        let mut power = self.entries.clone();
        let mut p: u64 = 1;
        for _ in 0..=MAX_SQUARINGS {
            let f = power.norm();
            if f < 1.0 {
                return Ok(SpectralCertificate::PowerNorm { power: p, bound: f.powf(1.0 / p as f64) });
            }
            if !f.is_finite() || f > 1e150 {
                break;
            }
            power = &power * &power;
            p *= 2;
        }
        Err(Error::Domain(format!(
            "spectral radius not certified below 1 (no power up to 2^{MAX_SQUARINGS} has Frobenius norm below 1)"
        )))
    }

    /// `sqrt(det(I - L))`, which equals the even-subgraph generating
    /// function once the spectral radius is certified below one.
    pub fn determinant_evaluation(&self) -> Result<f64> {
        self.certify_spectral_radius()?;
        positive_real_root(self.determinant())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.entries
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |m: f64, &s| m.max(s))
    }

    /// `tr L^r` for `r = 1..=r_max` (index 0 holds `tr I`).
    pub fn trace_powers(&self, r_max: usize) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(n as f64, 0.0)];
        let mut power = DMatrix::<Complex64>::identity(n, n);
        for _ in 1..=r_max {
            power = &power * &self.entries;
            out.push(power.trace());
        }
        out
    }
}

/// Square root of a determinant that must be real and positive.
pub fn positive_real_root(det: Complex64) -> Result<f64> {
    if det.im.abs() >= IMAGINARY_RESIDUE * det.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("determinant {det} is not real")));
    }
    if !(det.re > 0.0) {
        return Err(Error::Numerical(format!("determinant {det} is not positive")));
    }
    Ok(det.re.sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub r: usize,
    pub trace_re: f64,
    pub trace_im: f64,
    pub loop_sum: f64,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    pub ok: bool,
}

/// Compares `tr L^r` with `-2 r f_r` for `1 <= r <= r_max`.
pub fn trace_identity_check(m: &TransitionMatrix, census: &LoopSeriesAccumulator, r_max: usize) -> TraceReport {
    let traces = m.trace_powers(r_max);
    let rows: Vec<TraceRow> = (1..=r_max)
        .map(|r| {
            let t = traces[r];
            let f = census.get(r);
            let residual = (t + Complex64::new(2.0 * r as f64 * f, 0.0)).norm();
            TraceRow {
                r,
                trace_re: t.re,
                trace_im: t.im,
                loop_sum: f,
                residual,
                ok: residual < 1e-9 * (1.0 + t.norm()),
            }
        })
        .collect();
    let ok = rows.iter().all(|r| r.ok);
    TraceReport { rows, ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{lattice_point, rectangle};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn zero_weights() {
        let g = rectangle(3, 3).unwrap();
        let m = build_transition_matrix(&g, &EdgeWeights::uniform(&g, 0.0)).unwrap();
        assert_eq!(m.dim(), 24);
        assert!(m.matrix().iter().all(|z| z.norm() == 0.0));
        assert_eq!(m.determinant_evaluation().unwrap(), 1.0);
        assert_eq!(m.operator_norm(), 0.0);
    }

    #[test]
    fn east_row_on_interior_vertex() {
        let g = rectangle(3, 3).unwrap();
        let x = 0.3;
        let m = build_transition_matrix(&g, &EdgeWeights::uniform(&g, x)).unwrap();
        let p = |a: (i64, i64)| g.vertex_at(lattice_point(a.0, a.1)).unwrap();
        let (u, v) = (p((0, 1)), p((1, 1)));
        let e = |z| m.entry((u, v), (v, p(z))).unwrap();
        assert!((e((2, 1)) - Complex64::new(x, 0.0)).norm() < 1e-15);
        assert!((e((1, 2)) - Complex64::from_polar(x, FRAC_PI_4)).norm() < 1e-15);
        assert!((e((1, 0)) - Complex64::from_polar(x, -FRAC_PI_4)).norm() < 1e-15);
        assert_eq!(m.entry((u, v), (v, u)).unwrap(), Complex64::new(0.0, 0.0));
        let row = m.position(u, v).unwrap();
        assert_eq!(m.matrix().row(row).iter().filter(|z| z.norm() > 0.0).count(), 3);
    }

    #[test]
    fn four_cycle_determinant() {
        let g = rectangle(2, 2).unwrap();
        let m = build_transition_matrix(&g, &EdgeWeights::uniform(&g, 0.3)).unwrap();
        assert!((m.determinant_evaluation().unwrap() - 1.0081).abs() < 1e-14);
        assert!(matches!(m.certify_spectral_radius().unwrap(), SpectralCertificate::LatticeNormBound(_)));
    }

    #[test]
    fn uncertified_matrix_is_refused() {
        let g = rectangle(3, 3).unwrap();
        let m = build_transition_matrix(&g, &EdgeWeights::uniform(&g, 2.0)).unwrap();
        assert!(matches!(m.determinant_evaluation(), Err(Error::Domain(_))));
    }

    #[test]
    fn trace_of_square() {
        let g = rectangle(2, 2).unwrap();
        let x = 0.4;
        let m = build_transition_matrix(&g, &EdgeWeights::uniform(&g, x)).unwrap();
        let t = m.trace_powers(4);
        assert!(t[3].norm() < 1e-15);
        assert!((t[4] - Complex64::new(-8.0 * x.powi(4), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn root_checks() {
        assert!(positive_real_root(Complex64::new(-1.0, 0.0)).is_err());
        assert!(positive_real_root(Complex64::new(1.0, 1e-3)).is_err());
        assert_eq!(positive_real_root(Complex64::new(4.0, 1e-12)).unwrap(), 2.0);
    }
}
