//! Coherent EPPA-witness for a finite graph on `n·2^(n−1)` vertices.
//!
//! Vertices are pairs `(x, χ)` with `χ: A∖{x} → {0,1}`; `(x,χ)` and `(x',χ')`
//! are adjacent iff `x ≠ x'` and `χ(x') ≠ χ'(x)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{input, Result};
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::ordered::order_preserving_extension;
use crate::structure::{Structure, StructureBuilder};
use crate::witness::{check_partial_automorphism_of_copy, check_vertex_budget, Extender, Witness};

/// Valuation `χ` of one vertex, stored as a bitmask over vertex indices of `A`
/// (bit `y` is `χ(y)`; bit `owner` is always clear).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphValuation {
    pub owner: usize,
    pub bits: u64,
}

impl GraphValuation {
    pub fn get(&self, y: usize) -> bool {
        self.bits >> y & 1 == 1
    }
}

/// Unordered pairs of base vertices whose bits are flipped by an extension.
pub type FlipSet = BTreeSet<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct GraphExtension {
    pub theta: Morphism,
    pub flips: FlipSet,
    pub phi_hat: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GraphWitness {
    base: Structure,
    witness: Structure,
    psi: Vec<usize>,
    projection: Vec<usize>,
    valuations: Vec<GraphValuation>,
}

/// One symmetric irreflexive binary relation and the trivial group.
pub fn is_graph(a: &Structure) -> bool {
    let lang = a.language();
    lang.relations().len() == 1 && lang.is_relational() && lang.group().len() == 1 && a.is_undirected_graph_relation(0)
}

impl GraphWitness {
    pub fn build(a: &Structure, limits: &Limits) -> Result<Self> {
        if !is_graph(a) {
            return input("graph witness needs one symmetric irreflexive binary relation and the trivial group");
        }
        let n = a.len();
        if n > 40 {
            return input("graph too large for bitmask valuations");
        }
        let fiber = if n == 0 { 0 } else { 1u128 << (n - 1) };
        check_vertex_budget(n as u128 * fiber, limits)?;
        let fiber = fiber as usize;
        let mut valuations = Vec::with_capacity(n * fiber);
        let mut names = Vec::with_capacity(n * fiber);
        for x in 0..n {
            let others: Vec<usize> = (0..n).filter(|&y| y != x).collect();
            for rank in 0..fiber {
                // most significant bit belongs to the first vertex of A∖{x}
                let mut bits = 0u64;
                let mut label = format!("{}:", a.name(x));
                for (k, &y) in others.iter().enumerate() {
                    let bit = rank >> (others.len() - 1 - k) & 1;
                    bits |= (bit as u64) << y;
                    label.push(if bit == 1 { '1' } else { '0' });
                }
                valuations.push(GraphValuation { owner: x, bits });
                names.push(label);
            }
        }
        let mut b = StructureBuilder::new(a.language().clone(), names);
        for x in 0..n {
            for x2 in x + 1..n {
                for i in x * fiber..(x + 1) * fiber {
                    for j in x2 * fiber..(x2 + 1) * fiber {
                        if valuations[i].get(x2) != valuations[j].get(x) {
                            b.add_edge(0, i, j);
                        }
                    }
                }
            }
        }
        let witness = b.build()?;
        let mut w = GraphWitness {
            base: a.clone(),
            witness,
            psi: Vec::new(),
            projection: valuations.iter().map(|v| v.owner).collect(),
            valuations,
        };
        w.psi = (0..n)
            .map(|x| {
                let bits = (0..x).filter(|&y| a.has_tuple(0, &[x, y])).fold(0u64, |acc, y| acc | 1 << y);
                w.vertex_of(GraphValuation { owner: x, bits })
            })
            .collect();
        Ok(w)
    }

    pub fn valuation(&self, v: usize) -> GraphValuation {
        self.valuations[v]
    }

    pub fn valuations(&self) -> &[GraphValuation] {
        &self.valuations
    }

    /// Witness vertex carrying the given valuation.
    pub fn vertex_of(&self, val: GraphValuation) -> usize {
        let n = self.base.len();
        let fiber = 1usize << (n - 1);
        let others = (0..n).filter(|&y| y != val.owner);
        let rank = others.fold(0usize, |acc, y| acc << 1 | val.get(y) as usize);
        val.owner * fiber + rank
    }

    pub fn projection_map(&self) -> &[usize] {
        &self.projection
    }

    /// Extension of a partial automorphism of `ψ(A)` by flipping bits on the
    /// pairs where `φ` disagrees with the order-preserving extension of `π(φ)`.
    pub fn extend_pa(&self, phi: &Morphism) -> Result<GraphExtension> {
        check_partial_automorphism_of_copy(self, phi)?;
        let n = self.base.len();
        let projected: BTreeMap<usize, usize> =
            phi.map.iter().map(|(&u, &v)| (self.projection[u], self.projection[v])).collect();
        let phi_hat = order_preserving_extension(n, &projected)?;
        let mut flips = FlipSet::new();
        for (&u, &v) in &phi.map {
            let (chi, chi2) = (self.valuations[u], self.valuations[v]);
            for y in (0..n).filter(|&y| y != chi.owner) {
                if chi.get(y) != chi2.get(phi_hat[y]) {
                    flips.insert((chi.owner.min(y), chi.owner.max(y)));
                }
            }
        }
        let map: Vec<usize> = (0..self.witness.len())
            .map(|v| {
                let chi = self.valuations[v];
                let x = chi.owner;
                let mut bits = 0u64;
                for y in (0..n).filter(|&y| y != x) {
                    let flip = flips.contains(&(x.min(y), x.max(y)));
                    if chi.get(y) != flip {
                        bits |= 1 << phi_hat[y];
                    }
                }
                self.vertex_of(GraphValuation { owner: phi_hat[x], bits })
            })
            .collect();
        Ok(GraphExtension { theta: Morphism::total(phi.symbols.clone(), &map), flips, phi_hat })
    }

    /// The inverse of an extension, computed from its flip set:
    /// `(x', χ') ↦ (φ̂⁻¹(x'), χ)` with `χ(y) = χ'(φ̂(y))` xor `[{φ̂⁻¹(x'), y} ∈ F]`.
    pub fn inverse_extension(&self, ext: &GraphExtension) -> Morphism {
        let n = self.base.len();
        let mut hat_inv = vec![0; n];
        for (x, &y) in ext.phi_hat.iter().enumerate() {
            hat_inv[y] = x;
        }
        let map: Vec<usize> = (0..self.witness.len())
            .map(|v| {
                let chi2 = self.valuations[v];
                let x = hat_inv[chi2.owner];
                let mut bits = 0u64;
                for y in (0..n).filter(|&y| y != x) {
                    let flip = ext.flips.contains(&(x.min(y), x.max(y)));
                    if chi2.get(ext.phi_hat[y]) != flip {
                        bits |= 1 << y;
                    }
                }
                self.vertex_of(GraphValuation { owner: x, bits })
            })
            .collect();
        Morphism::total(ext.theta.symbols.inverse(), &map)
    }
}

impl Extender for GraphWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        Ok(self.extend_pa(phi)?.theta)
    }
}

impl Witness for GraphWitness {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.witness
    }
    fn embedding(&self) -> &[usize] {
        &self.psi
    }
    fn projection(&self) -> Option<&[usize]> {
        Some(&self.projection)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::morphism::{check_morphism, MorphismKind};
    use std::sync::Arc;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn single_vertex_gives_single_vertex() {
        let w = GraphWitness::build(&graph(1, &[]), &Limits::default()).unwrap();
        assert_eq!(w.structure().len(), 1);
        assert!(w.structure().relation(0).is_empty());
    }

    #[test]
    fn edge_gives_perfect_matching() {
        let w = GraphWitness::build(&graph(2, &[(0, 1)]), &Limits::default()).unwrap();
        let b = w.structure();
        assert_eq!(b.len(), 4);
        assert_eq!(b.relation(0).len(), 4);
        assert_eq!(b.names(), &["1:0", "1:1", "2:0", "2:1"]);
        // ψ(1) = (1, 2↦0), ψ(2) = (2, 1↦1)
        assert_eq!(w.embedding(), &[0, 3]);
        assert!(b.has_tuple(0, &[0, 3]));
    }

    #[test]
    fn triangle_gives_twelve_vertices() {
        let w = GraphWitness::build(&graph(3, &[(0, 1), (1, 2), (0, 2)]), &Limits::default()).unwrap();
        assert_eq!(w.structure().len(), 12);
    }

    #[test]
    fn non_graph_is_rejected() {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 2);
        b.add_tuple(0, &[0, 1]);
        assert!(GraphWitness::build(&b.build().unwrap(), &Limits::default()).is_err());
    }

    #[test]
    fn empty_map_extends_to_identity() {
        let w = GraphWitness::build(&graph(2, &[(0, 1)]), &Limits::default()).unwrap();
        let ext = w.extend_pa(&Morphism::empty(w.base().language().identity())).unwrap();
        assert!(ext.flips.is_empty());
        assert_eq!(ext.theta, Morphism::identity(w.structure()));
    }

    #[test]
    fn swapping_the_edge_extends_to_an_automorphism() {
        let w = GraphWitness::build(&graph(2, &[(0, 1)]), &Limits::default()).unwrap();
        let (p, q) = (w.embedding()[0], w.embedding()[1]);
        let phi = Morphism::new(w.base().language().identity(), [(p, q), (q, p)].into_iter().collect());
        let ext = w.extend_pa(&phi).unwrap();
        assert!(ext.theta.extends(&phi));
        assert_eq!(check_morphism(&ext.theta, MorphismKind::Automorphism, w.structure(), w.structure()), Ok(()));
        assert_eq!(w.inverse_extension(&ext), ext.theta.inverse());
    }

    #[test]
    fn identity_on_the_copy_extends_to_identity() {
        let w = GraphWitness::build(&graph(3, &[(0, 1)]), &Limits::default()).unwrap();
        let phi = Morphism::new(w.base().language().identity(), w.embedding().iter().map(|&v| (v, v)).collect());
        let ext = w.extend_pa(&phi).unwrap();
        assert!(ext.flips.is_empty());
        assert_eq!(ext.theta, Morphism::identity(w.structure()));
    }

    #[test]
    fn maps_outside_the_copy_are_rejected() {
        let w = GraphWitness::build(&graph(2, &[(0, 1)]), &Limits::default()).unwrap();
        let phi = Morphism::new(w.base().language().identity(), [(1, 1)].into_iter().collect());
        assert!(w.extend_pa(&phi).is_err());
    }
}
