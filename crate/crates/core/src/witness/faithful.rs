//! Irreducible-structure-faithful layer over an EPPA-witness `B₀`.
//!
//! Coordinates are the bad irreducible substructures `I` of `B₀` (those no
//! automorphism sends into `ψ₀(A)`); each takes `|I| − 1` digit values and two
//! distinct pairs sharing `I` must carry different digits.

use std::ops::Deref;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irreducible::enumerate_irreducible_substructures;
use crate::limits::Limits;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::search::{find_automorphism_with_image_indexed, SearchIndex};
use crate::structure::Structure;
use crate::witness::layered::{same_language, Coordinates, LayeredWitness, Rule};
use crate::witness::{Extender, Witness};

/// Closed irreducible subsets of `b0` that no automorphism maps into `image`.
pub fn enumerate_bad_irreducibles(b0: &Structure, image: &[usize], limits: &Limits) -> Result<Vec<Vec<usize>>> {
    let irreducibles = enumerate_irreducible_substructures(b0, limits)?;
    let index = SearchIndex::new(b0);
    let mut targets = image.to_vec();
    targets.sort_unstable();
    let verdicts: Vec<Result<bool>> = irreducibles
        .par_iter()
        .map(|set| {
            if set.iter().all(|v| targets.binary_search(v).is_ok()) {
                return Ok(false);
            }
            Ok(find_automorphism_with_image_indexed(b0, &index, set, &targets, limits)?.is_none())
        })
        .collect();
    let mut bad = Vec::new();
    for (set, verdict) in irreducibles.into_iter().zip(verdicts) {
        if verdict? {
            bad.push(set);
        }
    }
    Ok(bad)
}

#[derive(Clone)]
pub struct FaithfulWitness {
    layer: LayeredWitness,
}

impl std::fmt::Debug for FaithfulWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.layer.fmt(f)
    }
}

/// Outcome of certifying faithfulness irreducible by irreducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaithfulnessCertificate {
    pub irreducibles: usize,
    /// Irreducible vertex sets with the reason no certificate was produced.
    pub failures: Vec<(Vec<usize>, String)>,
}

impl FaithfulWitness {
    pub fn build(b0: Arc<dyn Witness>, limits: &Limits) -> Result<Self> {
        same_language(b0.as_ref())?;
        let bs = b0.structure();
        let psi0 = b0.embedding().to_vec();
        if bs.len() < psi0.len() {
            return Err(Error::Input("base witness is smaller than A".into()));
        }
        let bad = enumerate_bad_irreducibles(bs, &psi0, limits)?;
        let radix: Vec<u32> = bad.iter().map(|i| i.len() as u32 - 1).collect();
        let coords = Coordinates::new(Rule::Distinct, bs.len(), bad, radix)?;
        let mut a_of = vec![usize::MAX; bs.len()];
        for (a, &x) in psi0.iter().enumerate() {
            a_of[x] = a;
        }
        // digit of y at I: rank of y among I ∩ ψ₀(A), sorted in the order of A
        let digit = |k: usize, y: usize| -> u32 {
            let mut inside: Vec<usize> = coords.key(k).iter().map(|&v| a_of[v]).filter(|&a| a != usize::MAX).collect();
            inside.sort_unstable();
            inside.iter().position(|&a| a == a_of[y]).expect("vertex of the copy") as u32
        };
        let layer = LayeredWitness::build(b0.clone(), coords.clone(), &digit, limits)?;
        Ok(FaithfulWitness { layer })
    }

    pub fn bad_irreducibles(&self) -> &[Vec<usize>] {
        self.layer.coordinates().keys()
    }

    pub fn layer(&self) -> &LayeredWitness {
        &self.layer
    }

    /// For every irreducible substructure `D` of `B`: checks that `D` is
    /// generic, finds an automorphism of `B₀` sending `π(D)` into `ψ₀(A)`, and
    /// lifts it to an automorphism of `B` sending `D` into `ψ(A)`.
    pub fn certify_faithfulness(&self, limits: &Limits) -> Result<FaithfulnessCertificate> {
        certify_layer(&self.layer, limits)
    }
}

pub(crate) fn certify_layer(layer: &LayeredWitness, limits: &Limits) -> Result<FaithfulnessCertificate> {
    let b = layer.structure();
    let bs = layer.base_witness().structure();
    let psi0 = layer.base_witness().embedding();
    let psi = layer.embedding();
    let mut targets = psi0.to_vec();
    targets.sort_unstable();
    let mut copy = psi.to_vec();
    copy.sort_unstable();
    let proj = layer.projection().expect("layer projection");
    let irreducibles = enumerate_irreducible_substructures(b, limits)?;
    let index0 = SearchIndex::new(bs);
    let outcomes: Vec<Result<Option<String>>> = irreducibles
        .par_iter()
        .map(|d| {
            if !layer.is_generic(d) {
                return Ok(Some("not generic".into()));
            }
            let mut image: Vec<usize> = d.iter().map(|&v| proj[v]).collect();
            image.sort_unstable();
            image.dedup();
            let Some(hat) = find_automorphism_with_image_indexed(bs, &index0, &image, &targets, limits)? else {
                return Ok(Some("projection is bad".into()));
            };
            let map = d
                .iter()
                .map(|&v| {
                    let y = hat.get(proj[v]).unwrap();
                    let a = psi0.iter().position(|&z| z == y).unwrap();
                    (v, psi[a])
                })
                .collect();
            let phi = Morphism::new(hat.symbols.clone(), map);
            let theta = match layer.extend_with(&phi, &hat) {
                Ok(t) => t,
                Err(e) => return Ok(Some(e.to_string())),
            };
            if let Err(v) = check_morphism(&theta, MorphismKind::Automorphism, b, b) {
                return Ok(Some(format!("lifted map is not an automorphism: {v}")));
            }
            if d.iter().any(|&v| copy.binary_search(&theta.get(v).unwrap()).is_err()) {
                return Ok(Some("lifted map misses the copy".into()));
            }
            Ok(None)
        })
        .collect();
    let mut failures = Vec::new();
    for (d, o) in irreducibles.iter().zip(outcomes) {
        if let Some(reason) = o? {
            failures.push((d.clone(), reason));
        }
    }
    Ok(FaithfulnessCertificate { irreducibles: irreducibles.len(), failures })
}

impl Deref for FaithfulWitness {
    type Target = LayeredWitness;
    fn deref(&self) -> &LayeredWitness {
        &self.layer
    }
}

impl Extender for FaithfulWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        self.layer.extend(phi)
    }
}

impl Witness for FaithfulWitness {
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
    use crate::witness::graph::GraphWitness;
    use crate::witness::SearchWitness;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn base_equal_to_a_has_no_bad_sets() {
        let a = graph(2, &[(0, 1)]);
        let w = FaithfulWitness::build(Arc::new(SearchWitness::trivial(a, Limits::default())), &Limits::default()).unwrap();
        assert!(w.bad_irreducibles().is_empty());
        assert_eq!(w.structure().len(), 2);
    }

    #[test]
    fn triangles_of_the_path_witness_are_bad() {
        let a = graph(3, &[(0, 1), (1, 2)]);
        let b0 = GraphWitness::build(&a, &Limits::default()).unwrap();
        let bad = enumerate_bad_irreducibles(b0.structure(), b0.embedding(), &Limits::default()).unwrap();
        let triangles: Vec<&Vec<usize>> = bad.iter().filter(|s| s.len() == 3).collect();
        assert!(!triangles.is_empty());
        assert!(bad.iter().all(|s| s.len() == 3));
        let w = FaithfulWitness::build(Arc::new(b0), &Limits::default()).unwrap();
        assert_eq!(w.structure().len(), 48);
        let cert = w.certify_faithfulness(&Limits::default()).unwrap();
        assert!(cert.failures.is_empty(), "{:?}", cert.failures);
    }

    #[test]
    fn identity_extends_to_identity() {
        let a = graph(3, &[(0, 1), (1, 2)]);
        let w = FaithfulWitness::build(Arc::new(GraphWitness::build(&a, &Limits::default()).unwrap()), &Limits::default())
            .unwrap();
        let id = a.language().identity();
        assert_eq!(w.extend(&Morphism::empty(id)).unwrap(), Morphism::identity(w.structure()));
    }
}
