//! Faithful tree-like witnesses: add a complete edge relation, make the
//! witness irreducible-structure faithful, unwind short cycles repeatedly and
//! drop the edge again. Also amalgamation through EPPA-witnesses.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::irreducible::{disjoint_union, is_irreducible};
use crate::limits::Limits;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::structure::Structure;
use crate::tree::{decompose_tree_amalgamation, Decomposition, TreeAmalgamation, TreeObstruction};
use crate::witness::faithful::FaithfulWitness;
use crate::witness::unwind::{induced_graph_cycles, UnwoundWitness};
use crate::witness::{Extender, WithCompleteEdge, WithoutEdge, Witness, RESERVED_EDGE};

/// Number of unwinding rounds that makes every substructure on at most `n`
/// vertices tree-like: `(n − 1)·C(n, 2) + 1`.
pub fn unwinding_rounds(n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    (n - 1) * (n * (n - 1) / 2) + 1
}

/// The staged construction. Stage 0 is `B₀` with the complete edge relation,
/// stage 1 the faithful layer and stages `2..` the unwound layers; stages
/// carry the extra relation, the final witness does not.
pub struct PipelineWitness {
    stages: Vec<Arc<dyn Witness>>,
    result: WithoutEdge,
    to_base: Vec<usize>,
}

impl std::fmt::Debug for PipelineWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PipelineWitness")
            .field("stages", &self.stages.iter().map(|s| s.structure().len()).collect::<Vec<_>>())
            .finish()
    }
}

/// A stage at which a substructure was found to be tree-like.
#[derive(Debug, Clone)]
pub struct TreeCertificate {
    /// The substructure of the final witness, as a sorted closed vertex set.
    pub set: Vec<usize>,
    pub stage: usize,
    pub trace: TreeAmalgamation,
    /// Homomorphism-embedding of the substructure into the trace, indexed
    /// like `set`.
    pub map: Vec<usize>,
}

/// Serializable summary of a tree certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCertificateSummary {
    pub set: Vec<usize>,
    pub stage: usize,
    pub copies: usize,
    pub map: Vec<usize>,
}

impl From<&TreeCertificate> for TreeCertificateSummary {
    fn from(c: &TreeCertificate) -> Self {
        TreeCertificateSummary { set: c.set.clone(), stage: c.stage, copies: c.trace.copies().len(), map: c.map.clone() }
    }
}

/// Builds the witness for an irreducible `A` over `b0`, sized for
/// substructures on at most `n` vertices.
pub fn build_pipeline_witness(b0: Arc<dyn Witness>, n: usize, limits: &Limits) -> Result<PipelineWitness> {
    build_pipeline_with_rounds(b0, unwinding_rounds(n), limits)
}

/// As [`build_pipeline_witness`] with an explicit number of unwinding rounds.
pub fn build_pipeline_with_rounds(b0: Arc<dyn Witness>, rounds: usize, limits: &Limits) -> Result<PipelineWitness> {
    if !is_irreducible(b0.base()) {
        return input("A is not irreducible");
    }
    let start: Arc<dyn Witness> = Arc::new(WithCompleteEdge::new(b0)?);
    let faithful: Arc<dyn Witness> = Arc::new(FaithfulWitness::build(start.clone(), limits)?);
    let mut stages = vec![start, faithful];
    for _ in 0..rounds {
        let prev = stages.last().unwrap().clone();
        stages.push(Arc::new(UnwoundWitness::build(prev, RESERVED_EDGE, limits)?));
    }
    let result = WithoutEdge::new(stages.last().unwrap().clone())?;
    let mut to_base: Vec<usize> = (0..result.structure().len()).collect();
    for s in stages[1..].iter().rev() {
        let p = s.projection().expect("layer projection");
        for v in to_base.iter_mut() {
            *v = p[*v];
        }
    }
    Ok(PipelineWitness { stages, result, to_base })
}

impl PipelineWitness {
    pub fn rounds(&self) -> usize {
        self.stages.len() - 2
    }

    pub fn stages(&self) -> &[Arc<dyn Witness>] {
        &self.stages
    }

    /// The map `fᵢ` from stage `i ≥ 1` to stage `i − 1`.
    pub fn stage_map(&self, i: usize) -> &[usize] {
        self.stages[i].projection().expect("layer projection")
    }

    /// Composed map from the final witness to `B₀`.
    pub fn map_to_base(&self) -> &[usize] {
        &self.to_base
    }

    /// Checks that every stage map is a homomorphism-embedding.
    pub fn check_stage_maps(&self) -> Result<()> {
        for i in 1..self.stages.len() {
            let (s, t) = (self.stages[i].structure(), self.stages[i - 1].structure());
            let m = Morphism::total(s.language().identity(), self.stage_map(i));
            check_morphism(&m, MorphismKind::HomomorphismEmbedding, s, t)
                .map_err(|v| Error::Precondition(format!("stage map {i}: {v}")))?;
        }
        Ok(())
    }

    /// Follows the images of `set` (a vertex set of the final witness) down
    /// the stages until one is free of induced cycles of length at least four
    /// and decomposes it there.
    pub fn certify_tree_substructure(&self, set: &[usize], limits: &Limits) -> Result<Option<TreeCertificate>> {
        let top = self.stages.len() - 1;
        let mut set = self.stages[top].structure().closure(set)?;
        set.dedup();
        let a = self.stages[top].base();
        // current image of every element of `set`
        let mut images = set.clone();
        for stage in (1..=top).rev() {
            if stage < top {
                let p = self.stage_map(stage + 1);
                for v in images.iter_mut() {
                    *v = p[*v];
                }
            }
            let s = self.stages[stage].structure();
            let mut x = s.closure(&images)?;
            x.dedup();
            let (sub, old) = s.induced_substructure(&x)?;
            if !induced_graph_cycles(&sub.gaifman_neighbours(), limits)?.is_empty() {
                continue;
            }
            match decompose_tree_amalgamation(&sub, a, limits)? {
                Decomposition::Tree { trace, embedding } => {
                    let map: Vec<usize> =
                        images.iter().map(|v| embedding[old.binary_search(v).expect("image inside")]).collect();
                    let (c, _) = self.stages[top].structure().induced_substructure(&set)?;
                    let m = Morphism::total(c.language().identity(), &map);
                    check_morphism(&m, MorphismKind::HomomorphismEmbedding, &c, trace.structure())
                        .map_err(|v| Error::Precondition(format!("certificate map: {v}")))?;
                    return Ok(Some(TreeCertificate { set, stage, trace, map }));
                }
                Decomposition::Obstructed(TreeObstruction::InducedCycle(_)) => continue,
                Decomposition::Obstructed(o) => {
                    return Err(Error::Precondition(format!("stage {stage} is not tree-like: {o:?}")));
                }
            }
        }
        Ok(None)
    }
}

impl Extender for PipelineWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        self.result.extend(phi)
    }
}

impl Witness for PipelineWitness {
    fn base(&self) -> &Structure {
        self.result.base()
    }
    fn structure(&self) -> &Structure {
        self.result.structure()
    }
    fn embedding(&self) -> &[usize] {
        self.result.embedding()
    }
    fn projection(&self) -> Option<&[usize]> {
        Some(&self.to_base)
    }
}

/// An amalgam of `b1` and `b2` over `a` with its two embeddings.
#[derive(Debug, Clone)]
pub struct EppaAmalgam {
    pub structure: Structure,
    pub beta1: Vec<usize>,
    pub beta2: Vec<usize>,
}

/// Amalgamates `b1` and `b2` over `a` inside an EPPA-witness of their
/// disjoint union: the witness extends the partial automorphism sending the
/// copy of `a` in `b1` onto the copy in `b2`.
pub fn amalgamate_via_eppa(
    b1: &Structure,
    b2: &Structure,
    a: &Structure,
    alpha1: &Morphism,
    alpha2: &Morphism,
    provider: &dyn Fn(&Structure) -> Result<Arc<dyn Witness>>,
) -> Result<EppaAmalgam> {
    for (alpha, b) in [(alpha1, b1), (alpha2, b2)] {
        check_morphism(alpha, MorphismKind::Embedding, a, b)
            .map_err(|v| Error::Input(format!("amalgamation map is not an embedding: {v}")))?;
        if !alpha.symbols.is_identity() {
            return input("amalgamation maps must use identity symbols");
        }
    }
    let joint = disjoint_union(b1, b2)?;
    let w = provider(&joint.structure)?;
    let psi = w.embedding();
    let map = (0..a.len()).map(|x| (psi[joint.beta1[alpha1.map[&x]]], psi[joint.beta2[alpha2.map[&x]]])).collect();
    let theta = w.extend(&Morphism::new(a.language().identity(), map))?;
    let c = w.structure().clone();
    let beta1: Vec<usize> = joint.beta1.iter().map(|&v| theta.map[&psi[v]]).collect();
    let beta2: Vec<usize> = joint.beta2.iter().map(|&v| psi[v]).collect();
    for (beta, b) in [(&beta1, b1), (&beta2, b2)] {
        check_morphism(&Morphism::total(b.language().identity(), beta), MorphismKind::Embedding, b, &c)
            .map_err(|v| Error::Precondition(format!("amalgam map is not an embedding: {v}")))?;
    }
    if (0..a.len()).any(|x| beta1[alpha1.map[&x]] != beta2[alpha2.map[&x]]) {
        return Err(Error::Precondition("amalgam square does not commute".into()));
    }
    Ok(EppaAmalgam { structure: c, beta1, beta2 })
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
    fn round_counts() {
        assert_eq!(unwinding_rounds(2), 2);
        assert_eq!(unwinding_rounds(3), 7);
        assert_eq!(unwinding_rounds(1), 1);
    }

    #[test]
    fn trivial_pipeline_keeps_a() {
        let k2 = graph(2, &[(0, 1)]);
        let w = build_pipeline_witness(Arc::new(SearchWitness::trivial(k2, Limits::default())), 2, &Limits::default())
            .unwrap();
        assert_eq!(w.rounds(), 2);
        assert_eq!(w.structure().len(), 2);
        w.check_stage_maps().unwrap();
        let cert = w.certify_tree_substructure(&[0, 1], &Limits::default()).unwrap().unwrap();
        assert_eq!(cert.trace.copies().len(), 1);
    }

    #[test]
    fn reserved_symbol_collides() {
        let lang = Arc::new(Language::relational(&[(RESERVED_EDGE, 2)]));
        let a = StructureBuilder::numbered(lang, 1).build().unwrap();
        assert!(build_pipeline_witness(Arc::new(SearchWitness::trivial(a, Limits::default())), 2, &Limits::default())
            .is_err());
    }

    #[test]
    fn reducible_a_is_rejected() {
        let a = graph(2, &[]);
        assert!(build_pipeline_witness(Arc::new(SearchWitness::trivial(a, Limits::default())), 2, &Limits::default())
            .is_err());
    }

    #[test]
    fn two_edges_amalgamate_over_a_vertex() {
        let k2 = graph(2, &[(0, 1)]);
        let k1 = graph(1, &[]);
        let id = k2.language().identity();
        let a1 = Morphism::new(id.clone(), [(0, 1)].into_iter().collect());
        let a2 = Morphism::new(id, [(0, 0)].into_iter().collect());
        let provider = |s: &Structure| -> Result<Arc<dyn Witness>> { Ok(Arc::new(GraphWitness::build(s, &Limits::default())?)) };
        let am = amalgamate_via_eppa(&k2, &k2, &k1, &a1, &a2, &provider).unwrap();
        assert_eq!(am.beta1[1], am.beta2[0]);
    }
}
