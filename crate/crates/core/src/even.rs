//! Even subgraphs and the brute-force generating function.

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, EdgeWeights, EmbeddedGraph};
use crate::limits::Limits;

/// Number of registered crossing pairs with both edges in `f`.
pub fn crossing_count(g: &EmbeddedGraph, f: &EdgeSet) -> Result<usize> {
    if f.capacity() != g.num_edges() || f.iter().any(|e| e >= g.num_edges()) {
        return Err(Error::InvalidInput("edge subset does not belong to this graph".into()));
    }
    Ok(g.crossings().iter().filter(|&&(a, b)| f.contains(a) && f.contains(b)).count())
}

/// True when every vertex has even degree in `f`.
pub fn is_even(g: &EmbeddedGraph, f: &EdgeSet) -> bool {
    let mut parity = vec![false; g.num_vertices()];
    for e in f.iter() {
        let edge = g.edge(e);
        parity[edge.u] ^= true;
        parity[edge.v] ^= true;
    }
    parity.iter().all(|p| !p)
}

/// Fundamental cycles of a spanning forest, one per chord.
pub fn cycle_basis(g: &EmbeddedGraph) -> Vec<EdgeSet> {
    let n = g.num_vertices();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = EdgeSet::empty(g.num_edges());
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in g.neighbors(v) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, e));
                    tree.insert(e);
                    queue.push_back(w);
                }
            }
        }
    }
    let mut basis = Vec::new();
    for (id, edge) in g.edges().iter().enumerate() {
        if tree.contains(id) {
            continue;
        }
        let mut cycle = EdgeSet::from_edges(g.num_edges(), [id]);
        let (mut a, mut b) = (edge.u, edge.v);
        while a != b {
            if depth[a] < depth[b] {
                std::mem::swap(&mut a, &mut b);
            }
            let (p, e) = parent[a].expect("non-root vertex has a parent");
            cycle.toggle(e);
            a = p;
        }
        basis.push(cycle);
    }
    basis
}

enum Strategy {
    Basis(Vec<EdgeSet>),
    Subsets,
}

/// Stream of all even edge subsets, starting with the empty set.
pub struct EvenSubsets<'a> {
    g: &'a EmbeddedGraph,
    strategy: Strategy,
    current: EdgeSet,
    counter: u64,
    total: u64,
}

impl<'a> EvenSubsets<'a> {
    /// Number of subsets the stream yields.
    pub fn total(&self) -> u64 {
        self.total
    }
}

impl Iterator for EvenSubsets<'_> {
    type Item = EdgeSet;

    fn next(&mut self) -> Option<EdgeSet> {
        match &self.strategy {
            Strategy::Basis(basis) => {
                if self.counter >= self.total {
                    return None;
                }
                if self.counter > 0 {
                    // Gray code: flip the basis vector at the lowest set bit.
                    let k = self.counter.trailing_zeros() as usize;
                    self.current.symmetric_difference_with(&basis[k]);
                }
                self.counter += 1;
                Some(self.current.clone())
            }
            Strategy::Subsets => {
                let m = self.g.num_edges();
                while self.counter < (1u64 << m) {
                    let mask = self.counter;
                    self.counter += 1;
                    let f = EdgeSet::from_edges(m, (0..m).filter(|&e| mask >> e & 1 == 1));
                    if is_even(self.g, &f) {
                        return Some(f);
                    }
                }
                None
            }
        }
    }
}

/// Enumerates the even subsets of `g`.
///
/// Walks the `2^dim` combinations of a cycle basis when the cycle space is
/// much smaller than the edge set, and filters all `2^|E|` subsets
/// otherwise. Refuses when the exponent exceeds the cap.
pub fn enumerate_even_subsets<'a>(g: &'a EmbeddedGraph, limits: &Limits) -> Result<EvenSubsets<'a>> {
    let dim = g.cycle_space_dimension();
    let m = g.num_edges();
    let use_basis = dim + 8 < m;
    let exponent = if use_basis { dim } else { m };
    if exponent as u64 > limits.enumeration_exponent as u64 || exponent >= 63 {
        return Err(Error::CapExceeded(format!(
            "even-subset enumeration over 2^{exponent} sets ({m} edges, cycle space dimension {dim}) exceeds the cap 2^{}",
            limits.enumeration_exponent
        )));
    }
    let strategy = if use_basis { Strategy::Basis(cycle_basis(g)) } else { Strategy::Subsets };
    Ok(EvenSubsets {
        g,
        strategy,
        current: EdgeSet::empty(m),
        counter: 0,
        total: 1u64 << dim,
    })
}

/// `Z(x) = sum over even F of (-1)^{C_F} prod_{e in F} x_e`.
pub fn generating_function_bruteforce(g: &EmbeddedGraph, x: &EdgeWeights, limits: &Limits) -> Result<f64> {
    if x.len() != g.num_edges() {
        return Err(Error::InvalidInput("weight vector does not match the graph".into()));
    }
    let mut z = 0.0;
    for f in enumerate_even_subsets(g, limits)? {
        let term: f64 = f.iter().map(|e| x.get(e)).product();
        if term != 0.0 {
            let sign = if crossing_count(g, &f)? % 2 == 0 { 1.0 } else { -1.0 };
            z += sign * term;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rectangle;

    #[test]
    fn four_cycle_and_tree() {
        let g = rectangle(2, 2).unwrap();
        let subsets: Vec<_> = enumerate_even_subsets(&g, &Limits::default()).unwrap().collect();
        assert_eq!(subsets.len(), 2);
        assert!(subsets[0].is_empty());
        assert_eq!(subsets[1].len(), 4);
        let path = rectangle(1, 4).unwrap();
        assert_eq!(enumerate_even_subsets(&path, &Limits::default()).unwrap().count(), 1);
    }

    #[test]
    fn basis_route_matches_subset_route() {
        let g = rectangle(3, 4).unwrap();
        assert!(g.cycle_space_dimension() + 8 < g.num_edges());
        let mut via_basis: Vec<_> = enumerate_even_subsets(&g, &Limits::default()).unwrap().collect();
        let m = g.num_edges();
        let mut direct: Vec<_> = (0u64..1 << m)
            .map(|mask| EdgeSet::from_edges(m, (0..m).filter(|&e| mask >> e & 1 == 1)))
            .filter(|f| is_even(&g, f))
            .collect();
        via_basis.sort();
        direct.sort();
        assert_eq!(via_basis, direct);
    }

    #[test]
    fn cap_is_enforced() {
        let g = rectangle(3, 3).unwrap();
        let tight = Limits { enumeration_exponent: 3, ..Limits::default() };
        assert!(enumerate_even_subsets(&g, &tight).err().is_some_and(|e| e.is_cap()));
    }

    #[test]
    fn zero_weights_give_one() {
        let g = rectangle(3, 3).unwrap();
        let z = generating_function_bruteforce(&g, &EdgeWeights::uniform(&g, 0.0), &Limits::default()).unwrap();
        assert_eq!(z, 1.0);
    }

    #[test]
    fn crossing_count_rejects_foreign_sets() {
        let g = rectangle(2, 2).unwrap();
        assert!(crossing_count(&g, &EdgeSet::empty(7)).is_err());
        assert_eq!(crossing_count(&g, &EdgeSet::empty(4)).unwrap(), 0);
    }
}
