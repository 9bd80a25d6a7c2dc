//! Witness constructions and the extension interface they share.

pub mod faithful;
pub mod functions;
pub mod graph;
pub mod layered;
pub mod relational;
pub mod unwind;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{input, Error, Result};
use crate::language::Language;
use crate::limits::Limits;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::search::{extend_to_automorphism_indexed, SearchIndex};
use crate::structure::Structure;

/// Extends partial automorphisms of the generic copy to automorphisms.
pub trait Extender: Send + Sync {
    fn extend(&self, phi: &Morphism) -> Result<Morphism>;
}

/// A structure `B` together with an embedding `ψ: A → B` (identity symbols)
/// and an extension procedure for partial automorphisms of `ψ(A)`.
pub trait Witness: Extender {
    fn base(&self) -> &Structure;
    fn structure(&self) -> &Structure;
    /// `ψ` as a vector indexed by vertices of the base.
    fn embedding(&self) -> &[usize];
    /// Map `B → B₀` onto the structure this layer was built over, if any.
    fn projection(&self) -> Option<&[usize]> {
        None
    }
}

/// `ψ` as a morphism.
pub fn embedding_morphism(w: &dyn Witness) -> Morphism {
    Morphism::total(w.base().language().identity(), w.embedding())
}

/// The generic copy `ψ(A)`, sorted.
pub fn generic_copy(w: &dyn Witness) -> Vec<usize> {
    let mut c = w.embedding().to_vec();
    c.sort_unstable();
    c
}

/// Checks that `phi` is a partial automorphism of the substructure `ψ(A)` of `B`.
pub fn check_partial_automorphism_of_copy(w: &dyn Witness, phi: &Morphism) -> Result<()> {
    let copy = generic_copy(w);
    let (sub, old) = w.structure().induced_substructure(&copy)?;
    let mut local = BTreeMap::new();
    for (x, y) in &phi.map {
        match (old.binary_search(x), old.binary_search(y)) {
            (Ok(i), Ok(j)) => {
                local.insert(i, j);
            }
            _ => return input("map leaves the generic copy"),
        }
    }
    let m = Morphism::new(phi.symbols.clone(), local);
    check_morphism(&m, MorphismKind::PartialAutomorphism, &sub, &sub)
        .map_err(|v| Error::Input(format!("not a partial automorphism of the generic copy: {v}")))
}

/// A witness whose extensions are found by backtracking search. Extensions
/// are valid but carry no coherence guarantee.
pub struct SearchWitness {
    base: Structure,
    structure: Structure,
    embedding: Vec<usize>,
    index: SearchIndex,
    limits: Limits,
}

impl SearchWitness {
    pub fn new(base: Structure, structure: Structure, embedding: Vec<usize>, limits: Limits) -> Result<Self> {
        let psi = Morphism::total(base.language().identity(), &embedding);
        check_morphism(&psi, MorphismKind::Embedding, &base, &structure)
            .map_err(|v| Error::Input(format!("not an embedding: {v}")))?;
        let index = SearchIndex::new(&structure);
        Ok(SearchWitness { base, structure, embedding, index, limits })
    }

    /// `A` as its own witness.
    pub fn trivial(a: Structure, limits: Limits) -> Self {
        let id: Vec<usize> = (0..a.len()).collect();
        Self::new(a.clone(), a, id, limits).expect("identity embedding")
    }
}

impl Extender for SearchWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        check_partial_automorphism_of_copy(self, phi)?;
        extend_to_automorphism_indexed(&self.structure, &self.index, phi, &self.limits)?
            .ok_or_else(|| Error::Precondition("partial automorphism does not extend".into()))
    }
}

impl Witness for SearchWitness {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.structure
    }
    fn embedding(&self) -> &[usize] {
        &self.embedding
    }
}

/// Name of the binary relation added by the pipeline.
pub const RESERVED_EDGE: &str = "_E";

/// A witness over `L` seen over `L ∪ {E}` with `E` complete on `A` and on `B`.
pub struct WithCompleteEdge {
    inner: Arc<dyn Witness>,
    base: Structure,
    structure: Structure,
}

/// All ordered pairs of distinct vertices.
pub fn complete_pairs(n: usize) -> Vec<Vec<usize>> {
    (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| vec![x, y])).collect()
}

impl WithCompleteEdge {
    pub fn new(inner: Arc<dyn Witness>) -> Result<Self> {
        let lang = inner.base().language();
        if lang.relation_index(RESERVED_EDGE).is_some() || lang.function_index(RESERVED_EDGE).is_some() {
            return input(format!("symbol {RESERVED_EDGE} is reserved"));
        }
        let plus = Arc::new(lang.with_fixed_relation(RESERVED_EDGE, 2)?);
        let base = inner.base().with_extra_relation(plus.clone(), &complete_pairs(inner.base().len()))?;
        let structure = inner.structure().with_extra_relation(plus, &complete_pairs(inner.structure().len()))?;
        Ok(WithCompleteEdge { inner, base, structure })
    }
}

impl Extender for WithCompleteEdge {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        let lang = self.inner.base().language();
        let rels: Vec<usize> = (0..lang.relations().len()).collect();
        let funs: Vec<usize> = (0..lang.functions().len()).collect();
        let sym = phi.symbols.restrict(&rels, &funs).ok_or_else(|| Error::Input("bad symbols".into()))?;
        let theta = self.inner.extend(&Morphism::new(sym, phi.map.clone()))?;
        Ok(Morphism::new(theta.symbols.with_fixed_relation(), theta.map))
    }
}

impl Witness for WithCompleteEdge {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.structure
    }
    fn embedding(&self) -> &[usize] {
        self.inner.embedding()
    }
    fn projection(&self) -> Option<&[usize]> {
        self.inner.projection()
    }
}

/// A witness over `L ∪ {E}` seen over `L` by dropping the trailing relation `E`.
pub struct WithoutEdge {
    inner: Arc<dyn Witness>,
    language: Arc<Language>,
    base: Structure,
    structure: Structure,
}

impl WithoutEdge {
    pub fn new(inner: Arc<dyn Witness>) -> Result<Self> {
        let lang = inner.base().language();
        let k = lang.relations().len();
        if k == 0 || lang.relations()[k - 1].name != RESERVED_EDGE {
            return input("trailing relation is not the reserved edge");
        }
        let rels: Vec<usize> = (0..k - 1).collect();
        let funs: Vec<usize> = (0..lang.functions().len()).collect();
        let language = Arc::new(lang.sublanguage(&rels, &funs)?);
        let base = inner.base().reduct(language.clone(), &rels, &funs)?;
        let structure = inner.structure().reduct(language.clone(), &rels, &funs)?;
        Ok(WithoutEdge { inner, language, base, structure })
    }

    pub fn inner(&self) -> &Arc<dyn Witness> {
        &self.inner
    }
}

impl Extender for WithoutEdge {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        if !self.language.contains(&phi.symbols) {
            return input("symbols not in the group");
        }
        let lifted = Morphism::new(phi.symbols.with_fixed_relation(), phi.map.clone());
        let theta = self.inner.extend(&lifted)?;
        let k = self.language.relations().len();
        let rels: Vec<usize> = (0..k).collect();
        let funs: Vec<usize> = (0..self.language.functions().len()).collect();
        let sym = theta.symbols.restrict(&rels, &funs).ok_or_else(|| Error::Input("bad symbols".into()))?;
        Ok(Morphism::new(sym, theta.map))
    }
}

impl Witness for WithoutEdge {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.structure
    }
    fn embedding(&self) -> &[usize] {
        self.inner.embedding()
    }
    fn projection(&self) -> Option<&[usize]> {
        self.inner.projection()
    }
}

/// Guard used by constructions before materializing `count` vertices.
pub(crate) fn check_vertex_budget(count: u128, limits: &Limits) -> Result<()> {
    if count > limits.max_vertices as u128 {
        return Err(crate::error::limit(format!("witness would have {count} vertices"), limits.max_vertices as u64));
    }
    Ok(())
}

pub(crate) fn check_tuple_budget(count: usize, limits: &Limits) -> Result<()> {
    if count > limits.max_tuples {
        return Err(crate::error::limit("witness relation tuples", limits.max_tuples as u64));
    }
    Ok(())
}
