//! The rectangle closed up into a torus by chains of additional edges.
//!
//! Each right-boundary vertex `(M-1, y)` gets a representative edge to a new
//! vertex `(M, y)`, from which a chain of additional edges runs east, up
//! over the rectangle, down its left side and back east into `(0, y)`. Top
//! boundary vertices get the same treatment through chains that pass over
//! the right side and under the rectangle. Chains are nested so that no two
//! share a vertex; they cross each other freely. The chain turns add up to
//! `+-2 pi`, which one edge of weight `-1` per chain compensates.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Coordinate;
use crate::graph::{lattice_point, EdgeId, EdgeKind, EdgeWeights, EmbeddedGraph, GraphParts, VertexId, DEFAULT_DENOMINATOR};
use crate::kac_ward::{build_transition_matrix, TransitionMatrix};

/// Product of the weights along every wrap-around chain.
pub const CHAIN_WEIGHT_PRODUCT: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusSpec {
    pub width: usize,
    pub height: usize,
}

/// Directions in block order: east, north, west, south.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    East,
    North,
    West,
    South,
}

pub const DIRECTIONS: [Direction; 4] = [Direction::East, Direction::North, Direction::West, Direction::South];

#[derive(Clone, Debug)]
pub struct Torus {
    pub spec: TorusSpec,
    pub graph: EmbeddedGraph,
    /// The edge of each chain that carries the weight `-1`.
    pub signed_edges: Vec<EdgeId>,
}

impl Torus {
    pub fn new(spec: TorusSpec) -> Result<Torus> {
        let (m, n) = (spec.width as i64, spec.height as i64);
        if m < 2 || n < 2 {
            return Err(Error::InvalidInput("torus sides must be at least 2".into()));
        }
        let mut vertices: Vec<(i64, Coordinate)> = Vec::new();
        let mut edges = Vec::new();
        let mut signed = Vec::new();
        let mut add_vertex = |p: (i64, i64)| -> i64 {
            let label = vertices.len() as i64;
            vertices.push((label, lattice_point(p.0, p.1)));
            label
        };
        let mut grid = vec![vec![0i64; n as usize]; m as usize];
        for i in 0..m {
            for j in 0..n {
                grid[i as usize][j as usize] = add_vertex((i, j));
            }
        }
        for i in 0..m {
            for j in 0..n {
                let here = grid[i as usize][j as usize];
                if i + 1 < m {
                    edges.push((here, grid[i as usize + 1][j as usize], EdgeKind::Representative));
                }
                if j + 1 < n {
                    edges.push((here, grid[i as usize][j as usize + 1], EdgeKind::Representative));
                }
            }
        }
        let mut chain = |points: &[(i64, i64)], end: i64, first_rep: i64, edges: &mut Vec<(i64, i64, EdgeKind)>| {
            let labels: Vec<i64> = points.iter().map(|&p| add_vertex(p)).collect();
            edges.push((first_rep, labels[0], EdgeKind::Representative));
            for w in labels.windows(2) {
                edges.push((w[0], w[1], EdgeKind::Additional));
            }
            edges.push((*labels.last().expect("nonempty"), end, EdgeKind::Additional));
        };
        for y in 0..n {
            let a = n - y;
            let pts = [(m, y), (m + a, y), (m + a, n + a), (-1 - a, n + a), (-1 - a, y), (-1, y)];
            chain(&pts, grid[0][y as usize], grid[m as usize - 1][y as usize], &mut edges);
            signed.push(pts);
        }
        for x in 0..m {
            let b = m - x;
            let (top, right, bottom) = (2 * n + 1 + b, m + n + 1 + b, -1 - b);
            let pts = [(x, n), (x, top), (right, top), (right, bottom), (x, bottom), (x, -1)];
            chain(&pts, grid[x as usize][0], grid[x as usize][n as usize - 1], &mut edges);
            signed.push(pts);
        }
        let graph = EmbeddedGraph::from_parts(&GraphParts { denominator: DEFAULT_DENOMINATOR, vertices, edges })?;
        let signed_edges = signed
            .iter()
            .map(|pts| {
                let a = graph.vertex_at(lattice_point(pts[0].0, pts[0].1)).expect("chain start");
                let b = graph.vertex_at(lattice_point(pts[1].0, pts[1].1)).expect("chain corner");
                graph.edge_between(a, b).expect("chain edge")
            })
            .collect();
        Ok(Torus { spec, graph, signed_edges })
    }

    /// Representative weights `x`, chain weights `+1` except the signed edges.
    pub fn weights(&self, x: f64) -> EdgeWeights {
        let mut w = EdgeWeights::by_kind(&self.graph, x, 1.0);
        for &e in &self.signed_edges {
            w.set(e, CHAIN_WEIGHT_PRODUCT);
        }
        w
    }

    pub fn transition_matrix(&self, x: f64) -> Result<TransitionMatrix> {
        build_transition_matrix(&self.graph, &self.weights(x))
    }

    fn at(&self, i: i64, j: i64) -> VertexId {
        self.graph.vertex_at(lattice_point(i, j)).expect("torus vertex")
    }

    /// Directed representative edge leaving torus vertex `(i, j)` in direction `d`.
    pub fn out_edge(&self, i: usize, j: usize, d: Direction) -> (VertexId, VertexId) {
        let (i, j) = (i as i64, j as i64);
        let (m, n) = (self.spec.width as i64, self.spec.height as i64);
        match d {
            Direction::East => (self.at(i, j), self.at(i + 1, j)),
            Direction::North => (self.at(i, j), self.at(i, j + 1)),
            Direction::West if i == 0 => (self.at(m, j), self.at(m - 1, j)),
            Direction::West => (self.at(i, j), self.at(i - 1, j)),
            Direction::South if j == 0 => (self.at(i, n), self.at(i, n - 1)),
            Direction::South => (self.at(i, j), self.at(i, j - 1)),
        }
    }

    /// Directed representative edge pointing in direction `d` into `(i, j)`.
    pub fn in_edge(&self, i: usize, j: usize, d: Direction) -> (VertexId, VertexId) {
        let (m, n) = (self.spec.width, self.spec.height);
        match d {
            Direction::East => self.out_edge((i + m - 1) % m, j, Direction::East),
            Direction::North => self.out_edge(i, (j + n - 1) % n, Direction::North),
            Direction::West => self.out_edge((i + 1) % m, j, Direction::West),
            Direction::South => self.out_edge(i, (j + 1) % n, Direction::South),
        }
    }

    /// The 4x4 block of `matrix` from edges entering `(i, j)` to edges leaving it.
    pub fn vertex_block(&self, matrix: &TransitionMatrix, i: usize, j: usize) -> Matrix4<Complex64> {
        Matrix4::from_fn(|r, c| {
            matrix
                .entry(self.in_edge(i, j, DIRECTIONS[r]), self.out_edge(i, j, DIRECTIONS[c]))
                .expect("torus edges are indexed")
        })
    }
}

/// Builds the torus graph and its matrix with all representative weights 1.
pub fn build_torus(spec: TorusSpec) -> Result<(EmbeddedGraph, TransitionMatrix)> {
    let torus = Torus::new(spec)?;
    let m = torus.transition_matrix(1.0)?;
    Ok((torus.graph, m))
}

/// The block that every vertex contributes after reordering columns:
/// entry `(d, d')` is `exp(i angle / 2)` for the turn from `d` to `d'`,
/// zero for a reversal.
pub fn turning_block() -> Matrix4<Complex64> {
    let p = |k: f64| Complex64::from_polar(1.0, k * FRAC_PI_4);
    let o = Complex64::new(0.0, 0.0);
    Matrix4::new(
        p(0.0), p(1.0), o, p(-1.0),
        p(-1.0), p(0.0), p(1.0), o,
        o, p(-1.0), p(0.0), p(1.0),
        p(1.0), o, p(-1.0), p(0.0),
    )
}

/// Eigenvalues of the Hermitian turning block, ascending.
pub fn turning_block_eigenvalues() -> Vec<f64> {
    let mut ev: Vec<f64> = turning_block().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `prod_{p,q} [(1+x^2)^2 - 2x(1-x^2)(cos(2 pi p/M) + cos(2 pi q/N))]`.
pub fn torus_fourier_determinant(spec: TorusSpec, x: f64) -> f64 {
    let a = (1.0 + x * x).powi(2);
    let b = 2.0 * x * (1.0 - x * x);
    let mut prod = 1.0;
    for p in 0..spec.width {
        for q in 0..spec.height {
            let c = (2.0 * PI * p as f64 / spec.width as f64).cos() + (2.0 * PI * q as f64 / spec.height as f64).cos();
            prod *= a - b * c;
        }
    }
    prod
}

/// `sqrt 2 + 1`.
pub fn torus_norm() -> f64 {
    SQRT_2 + 1.0
}

/// Dense matrix of the `(p, q)` Fourier block, directions ordered E, N, W, S.
pub fn fourier_block(spec: TorusSpec, p: usize, q: usize) -> DMatrix<Complex64> {
    let wp = 2.0 * PI * p as f64 / spec.width as f64;
    let wq = 2.0 * PI * q as f64 / spec.height as f64;
    let e = |phase: f64| Complex64::from_polar(1.0, phase);
    let o = Complex64::new(0.0, 0.0);
    let f = FRAC_PI_4;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            e(wp), e(wp + f), o, e(wp - f),
            e(wq - f), e(wq), e(wq + f), o,
            o, e(-wp - f), e(-wp), e(-wp + f),
            e(-wq + f), o, e(-wq - f), e(-wq),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_of_small_tori() {
        for (m, n) in [(2, 2), (3, 2), (2, 4), (3, 3)] {
            let torus = Torus::new(TorusSpec { width: m, height: n }).unwrap();
            let lm = torus.transition_matrix(1.0).unwrap();
            assert_eq!(lm.dim(), 4 * m * n);
            for row in 0..lm.dim() {
                assert_eq!(lm.matrix().row(row).iter().filter(|z| z.norm() > 1e-12).count(), 3);
            }
            for i in 0..m {
                for j in 0..n {
                    let block = torus.vertex_block(&lm, i, j);
                    assert!((block - turning_block()).norm() < 1e-12, "block at ({i},{j}) on {m}x{n}");
                }
            }
        }
        assert!(Torus::new(TorusSpec { width: 1, height: 3 }).is_err());
    }

    #[test]
    fn block_spectrum() {
        let ev = turning_block_eigenvalues();
        let s = SQRT_2;
        for (got, want) in ev.iter().zip([1.0 - s, 1.0 - s, 1.0 + s, 1.0 + s]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut moduli: Vec<f64> = ev.iter().map(|v| v.abs()).collect();
        moduli.sort_by(f64::total_cmp);
        for (got, want) in moduli.iter().zip([s - 1.0, s - 1.0, s + 1.0, s + 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_product_at_zero_and_2x2() {
        let spec = TorusSpec { width: 2, height: 2 };
        assert_eq!(torus_fourier_determinant(spec, 0.0), 1.0);
        let x: f64 = 0.25;
        let a = (1.0 + x * x).powi(2);
        let b = 4.0 * x * (1.0 - x * x);
        let expanded = (a - b) * (a + b) * a * a;
        assert!((torus_fourier_determinant(spec, x) - expanded).abs() < 1e-14);
    }

    #[test]
    fn norm_and_determinant_match_fourier() {
        for (m, n) in [(2, 2), (3, 2), (3, 3), (4, 3)] {
            let spec = TorusSpec { width: m, height: n };
            let torus = Torus::new(spec).unwrap();
            assert!((torus.transition_matrix(1.0).unwrap().operator_norm() - torus_norm()).abs() < 1e-9);
            for x in [0.1, 0.25, 0.4] {
                let det = torus.transition_matrix(x).unwrap().determinant();
                let want = torus_fourier_determinant(spec, x);
                assert!(det.im.abs() < 1e-9);
                assert!((det.re - want).abs() <= 1e-9 * want.abs(), "{m}x{n} x={x}: {det} vs {want}");
            }
        }
    }

    #[test]
    fn fourier_blocks_factor_the_product() {
        let spec = TorusSpec { width: 3, height: 4 };
        let x: f64 = 0.3;
        let a = (1.0 + x * x).powi(2);
        let b = 2.0 * x * (1.0 - x * x);
        for p in 0..3 {
            for q in 0..4 {
                let block = DMatrix::<Complex64>::identity(4, 4) - fourier_block(spec, p, q) * Complex64::new(x, 0.0);
                let c = (2.0 * PI * p as f64 / 3.0).cos() + (2.0 * PI * q as f64 / 4.0).cos();
                assert!((block.determinant() - Complex64::new(a - b * c, 0.0)).norm() < 1e-12);
            }
        }
    }
}
