//! Cycle-unwinding layer: no induced `E`-cycle of length at least four in the
//! witness projects onto an induced cycle of the same length in `B₀`.
//!
//! Coordinates are bad cycle sequences of `B₀` with binary digits. Distinct
//! pairs sharing a sequence are generic iff they are consecutive on it with
//! equal digits, or are its first and last entry with different digits.

use std::ops::Deref;
use std::sync::Arc;

use crate::error::{input, limit, Result};
use crate::irreducible::is_irreducible;
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::structure::Structure;
use crate::witness::faithful::{certify_layer, FaithfulnessCertificate};
use crate::witness::layered::{same_language, Coordinates, LayeredWitness, Rule};
use crate::witness::{Extender, Witness};

/// Vertex sets of induced cycles of length at least four in the graph of the
/// binary relation `e`, each as a cycle starting at its least vertex.
pub fn induced_cycles(s: &Structure, e: usize, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    induced_graph_cycles(&s.binary_neighbours(e), limits)
}

/// As [`induced_cycles`] for a graph given by symmetric adjacency lists.
pub fn induced_graph_cycles(adj: &[Vec<usize>], limits: &Limits) -> Result<Vec<Vec<usize>>> {
    let n = adj.len();
    let mut is_adj = vec![vec![false; n]; n];
    for (x, ns) in adj.iter().enumerate() {
        for &y in ns {
            is_adj[x][y] = true;
        }
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    for start in 0..n {
        path.clear();
        path.push(start);
        grow(adj, &is_adj, &mut path, &mut out, limits)?;
    }
    Ok(out)
}

fn grow(
    adj: &[Vec<usize>],
    is_adj: &[Vec<bool>],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limits: &Limits,
) -> Result<()> {
    let s = path[0];
    let last = *path.last().unwrap();
    let m = path.len();
    for &v in &adj[last] {
        if v <= s || path.contains(&v) {
            continue;
        }
        // no chord to the inner path vertices
        if path.iter().skip(1).take(m.saturating_sub(2)).any(|&p| is_adj[v][p]) {
            continue;
        }
        if m >= 2 && is_adj[v][s] {
            if m >= 3 && path[1] < v {
                let mut cycle = path.clone();
                cycle.push(v);
                out.push(cycle);
                if out.len() > limits.max_enumeration {
                    return Err(limit("induced cycles", limits.max_enumeration as u64));
                }
            }
            continue;
        }
        path.push(v);
        grow(adj, is_adj, path, out, limits)?;
        path.pop();
    }
    Ok(())
}

/// All bad cycle sequences: every rotation of every induced cycle of length
/// at least four, in both directions.
pub fn bad_cycle_sequences(s: &Structure, e: usize, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for c in induced_cycles(s, e, limits)? {
        let k = c.len();
        for i in 0..k {
            out.push((0..k).map(|j| c[(i + j) % k]).collect());
            out.push((0..k).map(|j| c[(i + k - j) % k]).collect());
        }
    }
    if out.len() > limits.max_enumeration {
        return Err(limit("bad cycle sequences", limits.max_enumeration as u64));
    }
    out.sort();
    Ok(out)
}

#[derive(Clone)]
pub struct UnwoundWitness {
    layer: LayeredWitness,
    edge: usize,
}

impl std::fmt::Debug for UnwoundWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.layer.fmt(f)
    }
}

impl UnwoundWitness {
    /// `b0` must be an irreducible-structure-faithful witness for an
    /// irreducible `A` on which the relation named `edge` is complete.
    pub fn build(b0: Arc<dyn Witness>, edge: &str, limits: &Limits) -> Result<Self> {
        same_language(b0.as_ref())?;
        let a = b0.base();
        let lang = a.language();
        let Some(e) = lang.relation_index(edge) else {
            return input(format!("no relation named {edge}"));
        };
        if lang.arity(e) != 2 || lang.group().iter().any(|g| g.rel(e) != e) {
            return input("edge relation must be binary and fixed by the group");
        }
        let n = a.len();
        if (0..n).any(|x| (0..n).any(|y| x != y && !a.has_tuple(e, &[x, y]))) {
            return input("edge relation is not complete on A");
        }
        if !is_irreducible(a) {
            return input("A is not irreducible");
        }
        let bs = b0.structure();
        if !bs.is_undirected_graph_relation(e) {
            return input("edge relation of the base witness is not an undirected loopless graph");
        }
        let seqs = bad_cycle_sequences(bs, e, limits)?;
        let radix = vec![2; seqs.len()];
        let coords = Coordinates::new(Rule::Cycle, bs.len(), seqs, radix)?;
        let mut in_a = vec![false; bs.len()];
        for &x in b0.embedding() {
            in_a[x] = true;
        }
        let digit = |k: usize, y: usize| -> u32 {
            let c = coords.key(k);
            (y == c[0] && in_a[c[c.len() - 1]]) as u32
        };
        let layer = LayeredWitness::build(b0.clone(), coords.clone(), &digit, limits)?;
        Ok(UnwoundWitness { layer, edge: e })
    }

    pub fn edge(&self) -> usize {
        self.edge
    }

    pub fn bad_cycle_sequences(&self) -> &[Vec<usize>] {
        self.layer.coordinates().keys()
    }

    pub fn layer(&self) -> &LayeredWitness {
        &self.layer
    }

    pub fn certify_faithfulness(&self, limits: &Limits) -> Result<FaithfulnessCertificate> {
        certify_layer(&self.layer, limits)
    }
}

impl Deref for UnwoundWitness {
    type Target = LayeredWitness;
    fn deref(&self) -> &LayeredWitness {
        &self.layer
    }
}

impl Extender for UnwoundWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        self.layer.extend(phi)
    }
}

impl Witness for UnwoundWitness {
    fn base(&self) -> &Structure {
        self.layer.base()
    }
    fn structure(&self) -> &Structure {
        self.layer.structure()
    }
    fn embedding(&self) -> &[usize] {
        self.layer.embedding()
    }
    fn projection(&self) -> Option<&[usize]> {
        self.layer.projection()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::structure::StructureBuilder;
    use crate::witness::SearchWitness;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn cycle_enumeration() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(induced_cycles(&c4, 0, &Limits::default()).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(bad_cycle_sequences(&c4, 0, &Limits::default()).unwrap().len(), 8);
        let k4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]);
        assert!(induced_cycles(&k4, 0, &Limits::default()).unwrap().is_empty());
        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(induced_cycles(&c5, 0, &Limits::default()).unwrap().len(), 1);
        // a 4-cycle with one chord has only triangles
        let chord = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        assert!(induced_cycles(&chord, 0, &Limits::default()).unwrap().is_empty());
    }

    fn c4_base() -> Arc<dyn Witness> {
        let a = graph(2, &[(0, 1)]);
        let b0 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        Arc::new(SearchWitness::new(a, b0, vec![0, 1], Limits::default()).unwrap())
    }

    #[test]
    fn unwinding_a_four_cycle() {
        let w = UnwoundWitness::build(c4_base(), "E", &Limits::default()).unwrap();
        assert_eq!(w.structure().len(), 1024);
        // every vertex has exactly one neighbour over each base neighbour
        let adj = w.structure().binary_neighbours(0);
        assert!(adj.iter().all(|ns| ns.len() == 2));
    }

    #[test]
    fn acyclic_base_is_copied() {
        let a = graph(2, &[(0, 1)]);
        let b0 = graph(3, &[(0, 1), (1, 2)]);
        let base: Arc<dyn Witness> = Arc::new(SearchWitness::new(a, b0, vec![0, 1], Limits::default()).unwrap());
        let w = UnwoundWitness::build(base, "E", &Limits::default()).unwrap();
        assert_eq!(w.structure().len(), 3);
        assert_eq!(w.structure().relation(0).len(), 4);
    }

    #[test]
    fn incomplete_edge_is_rejected() {
        let a = graph(2, &[]);
        let base: Arc<dyn Witness> = Arc::new(SearchWitness::trivial(a, Limits::default()));
        assert!(UnwoundWitness::build(base, "E", &Limits::default()).is_err());
    }
}
