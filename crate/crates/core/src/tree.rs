//! Tree amalgamations of copies of an irreducible structure `A`: build traces,
//! replay, cut decomposition and completion along a trace.

use std::collections::VecDeque;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{input, limit, Error, Result};
use crate::irreducible::{free_amalgamation, is_irreducible, FreeAmalgam};
use crate::limits::Limits;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::search::find_embedding;
use crate::structure::Structure;
use crate::witness::unwind::induced_graph_cycles;

/// Gluing of one new copy of `A` onto an earlier copy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingStep {
    /// Index of the earlier copy.
    pub parent: usize,
    /// `(vertex of the new copy, vertex of the parent copy)`, both as
    /// vertices of `A`, sorted by the first entry.
    pub pairs: Vec<(usize, usize)>,
}

/// A structure `D` built from `A` by gluing copies one at a time.
#[derive(Debug, Clone)]
pub struct TreeAmalgamation {
    a: Structure,
    steps: Vec<GluingStep>,
    structure: Structure,
    copies: Vec<Vec<usize>>,
}

impl TreeAmalgamation {
    /// Replays `steps` starting from a single copy of `a`.
    pub fn replay(a: &Structure, steps: &[GluingStep]) -> Result<Self> {
        if !is_irreducible(a) {
            return input("A is not irreducible");
        }
        let id = a.language().identity();
        let mut d = a.clone();
        let mut copies: Vec<Vec<usize>> = vec![(0..a.len()).collect()];
        for (i, step) in steps.iter().enumerate() {
            if step.parent >= copies.len() {
                return input(format!("step {i} glues onto a later copy"));
            }
            let (overlap, onto): (Vec<usize>, Vec<usize>) = step.pairs.iter().copied().unzip();
            if !overlap.windows(2).all(|w| w[0] < w[1]) {
                return input(format!("step {i}: overlap must be sorted and repetition-free"));
            }
            let (o, old) = a.induced_substructure(&overlap).map_err(|e| Error::Input(format!("step {i}: {e}")))?;
            if !a.is_closed(&overlap) {
                return input(format!("step {i}: overlap is not closed in A"));
            }
            // the overlap must sit inside the parent copy as a substructure
            let delta = Morphism::new(id.clone(), (0..old.len()).zip(onto.iter().copied()).collect());
            if let Err(v) = check_morphism(&delta, MorphismKind::Embedding, &o, a) {
                return input(format!("step {i}: overlap does not embed into the parent copy: {v}"));
            }
            let alpha1 = Morphism::new(id.clone(), (0..old.len()).map(|j| (j, copies[step.parent][onto[j]])).collect());
            let alpha2 = Morphism::new(id.clone(), (0..old.len()).zip(overlap.iter().copied()).collect());
            let FreeAmalgam { structure, beta2, .. } = free_amalgamation(&d, a, &o, &alpha1, &alpha2)?;
            d = structure;
            copies.push(beta2);
        }
        Ok(TreeAmalgamation { a: a.clone(), steps: steps.to_vec(), structure: d, copies })
    }

    pub fn a(&self) -> &Structure {
        &self.a
    }

    pub fn steps(&self) -> &[GluingStep] {
        &self.steps
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Embedding of `A` onto each copy, in gluing order.
    pub fn copies(&self) -> &[Vec<usize>] {
        &self.copies
    }

    /// Index of some copy containing all of `xs`.
    pub fn copy_containing(&self, xs: &[usize]) -> Option<usize> {
        self.copies.iter().position(|c| xs.iter().all(|x| c.contains(x)))
    }

    /// Replays the stored steps and compares with the stored structure.
    pub fn validate(&self) -> Result<()> {
        let again = Self::replay(&self.a, &self.steps)?;
        if again.structure != self.structure || again.copies != self.copies {
            return Err(Error::Precondition("trace does not replay to the stored structure".into()));
        }
        Ok(())
    }
}

/// Why a structure is not a substructure of a tree amalgamation of `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeObstruction {
    /// An induced cycle of length at least four in the Gaifman graph.
    InducedCycle(Vec<usize>),
    /// An irreducible substructure with no embedding into `A`.
    NotEmbeddable(Vec<usize>),
    /// A minimal closed vertex cut that is not irreducible.
    ReducibleCut(Vec<usize>),
}

/// Outcome of [`decompose_tree_amalgamation`].
#[derive(Debug, Clone)]
pub enum Decomposition {
    /// `embedding` maps `B` onto a substructure of the replayed trace.
    Tree { trace: TreeAmalgamation, embedding: Vec<usize> },
    Obstructed(TreeObstruction),
}

/// Writes `b` as a substructure of a tree amalgamation of copies of `a`.
///
/// Splits along the first closed vertex cut in order of size, then
/// lexicographically, of the Gaifman graph; the part holding the least vertex
/// outside the cut goes first. Copies are identified with identity symbols.
pub fn decompose_tree_amalgamation(b: &Structure, a: &Structure, limits: &Limits) -> Result<Decomposition> {
    if b.language() != a.language() {
        return input("B and A use different languages");
    }
    if !is_irreducible(a) {
        return input("A is not irreducible");
    }
    if let Some(c) = induced_graph_cycles(&b.gaifman_neighbours(), limits)?.into_iter().next() {
        return Ok(Decomposition::Obstructed(TreeObstruction::InducedCycle(c)));
    }
    let all: Vec<usize> = (0..b.len()).collect();
    match split(b, a, &all, limits)? {
        Ok((trace, embedding)) => {
            let m = Morphism::total(b.language().identity(), &embedding);
            if let Err(v) = check_morphism(&m, MorphismKind::Embedding, b, trace.structure()) {
                return Err(Error::Precondition(format!("decomposition is not an embedding: {v}")));
            }
            Ok(Decomposition::Tree { trace, embedding })
        }
        Err(o) => Ok(Decomposition::Obstructed(o)),
    }
}

type Split = std::result::Result<(TreeAmalgamation, Vec<usize>), TreeObstruction>;

/// Decomposes the substructure of `b` on the closed set `set`; the returned
/// map is indexed like `set`.
fn split(b: &Structure, a: &Structure, set: &[usize], limits: &Limits) -> Result<Split> {
    let (sub, _) = b.induced_substructure(set)?;
    if is_irreducible(&sub) {
        let Some(eps) = find_embedding(&sub, a, true, limits)? else {
            return Ok(Err(TreeObstruction::NotEmbeddable(set.to_vec())));
        };
        let trace = TreeAmalgamation::replay(a, &[])?;
        return Ok(Ok((trace, eps.as_vec(sub.len()).expect("total embedding"))));
    }
    let adj = sub.gaifman_neighbours();
    let m = sub.len();
    let mut tried = 0usize;
    let mut cut = None;
    'search: for k in 0..m.saturating_sub(1) {
        for c in (0..m).combinations(k) {
            tried += 1;
            if tried > limits.max_enumeration {
                return Err(limit("vertex cut search", limits.max_enumeration as u64));
            }
            if !sub.is_closed(&c) {
                continue;
            }
            let comps = components(&adj, &c);
            if comps.len() >= 2 {
                cut = Some((c, comps));
                break 'search;
            }
        }
    }
    let (c, comps) = cut.expect("a reducible structure has a closed cut");
    let global = |xs: &[usize]| -> Vec<usize> { xs.iter().map(|&x| set[x]).collect() };
    if !c.is_empty() {
        let (cs, _) = sub.induced_substructure(&c)?;
        if !is_irreducible(&cs) {
            return Ok(Err(TreeObstruction::ReducibleCut(global(&c))));
        }
    }
    let mut s1: Vec<usize> = comps[0].iter().chain(&c).copied().collect();
    let mut s2: Vec<usize> = comps[1..].iter().flatten().chain(&c).copied().collect();
    s1.sort_unstable();
    s2.sort_unstable();
    let (g1, g2) = (global(&s1), global(&s2));
    let (t1, m1) = match split(b, a, &g1, limits)? {
        Ok(x) => x,
        Err(o) => return Ok(Err(o)),
    };
    let (t2, m2) = match split(b, a, &g2, limits)? {
        Ok(x) => x,
        Err(o) => return Ok(Err(o)),
    };
    let pos1 = |x: usize| s1.binary_search(&x).unwrap();
    let pos2 = |x: usize| s2.binary_search(&x).unwrap();
    let c1: Vec<usize> = c.iter().map(|&x| m1[pos1(x)]).collect();
    let c2: Vec<usize> = c.iter().map(|&x| m2[pos2(x)]).collect();
    let (Some(i1), Some(i2)) = (t1.copy_containing(&c1), t2.copy_containing(&c2)) else {
        return Err(Error::Precondition("irreducible cut lies in no single copy".into()));
    };
    let local = |copy: &[usize], v: usize| copy.iter().position(|&w| w == v).unwrap();
    let mut first: Vec<(usize, usize)> =
        c1.iter().zip(&c2).map(|(&v1, &v2)| (local(&t2.copies[i2], v2), local(&t1.copies[i1], v1))).collect();
    first.sort_unstable();
    // reroot the second trace at copy i2 and append it breadth first
    let order = reroot(&t2, i2);
    let offset = t1.copies.len();
    let mut new_index = vec![usize::MAX; t2.copies.len()];
    for (k, (copy, _, _)) in order.iter().enumerate() {
        new_index[*copy] = offset + k;
    }
    let mut steps = t1.steps.clone();
    for (copy, parent, pairs) in &order {
        if *copy == i2 {
            steps.push(GluingStep { parent: i1, pairs: first.clone() });
        } else {
            steps.push(GluingStep { parent: new_index[*parent], pairs: pairs.clone() });
        }
    }
    let trace = TreeAmalgamation::replay(a, &steps)?;
    let mut embedding = vec![usize::MAX; set.len()];
    for (i, &x) in s1.iter().enumerate() {
        embedding[x] = m1[i];
    }
    for (i, &x) in s2.iter().enumerate() {
        if embedding[x] != usize::MAX {
            continue;
        }
        let v = m2[i];
        let (copy, av) = t2
            .copies
            .iter()
            .enumerate()
            .find_map(|(k, cp)| cp.iter().position(|&w| w == v).map(|av| (k, av)))
            .expect("every vertex lies in a copy");
        embedding[x] = trace.copies[new_index[copy]][av];
    }
    Ok(Ok((trace, embedding)))
}

/// Connected components of the graph minus `cut`, each sorted, ordered by
/// least vertex.
fn components(adj: &[Vec<usize>], cut: &[usize]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    for &c in cut {
        seen[c] = true;
    }
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Copies of `t` in breadth-first order from `root`, each with its parent in
/// that order and the gluing pairs oriented from child to parent.
fn reroot(t: &TreeAmalgamation, root: usize) -> Vec<(usize, usize, Vec<(usize, usize)>)> {
    let k = t.copies.len();
    let mut nbrs: Vec<Vec<(usize, Vec<(usize, usize)>)>> = vec![Vec::new(); k];
    for (i, s) in t.steps.iter().enumerate() {
        let child = i + 1;
        nbrs[child].push((s.parent, s.pairs.clone()));
        let mut back: Vec<(usize, usize)> = s.pairs.iter().map(|&(x, y)| (y, x)).collect();
        back.sort_unstable();
        nbrs[s.parent].push((child, back));
    }
    let mut out = vec![(root, usize::MAX, Vec::new())];
    let mut seen = vec![false; k];
    seen[root] = true;
    let mut i = 0;
    while i < out.len() {
        let v = out[i].0;
        for (w, pairs) in &nbrs[v] {
            if !seen[*w] {
                seen[*w] = true;
                // pairs are stored as (vertex of v, vertex of w); flip to child first
                let mut p: Vec<(usize, usize)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
                p.sort_unstable();
                out.push((*w, v, p));
            }
        }
        i += 1;
    }
    out
}

/// Amalgamation oracle of a class: an amalgam of `b1` and `b2` over `a` with
/// `β1∘α1 = β2∘α2`.
pub trait Amalgamator {
    fn amalgamate(&self, b1: &Structure, b2: &Structure, a: &Structure, alpha1: &Morphism, alpha2: &Morphism)
        -> Result<FreeAmalgam>;
}

/// Plain free amalgamation.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeAmalgamator;

impl Amalgamator for FreeAmalgamator {
    fn amalgamate(&self, b1: &Structure, b2: &Structure, a: &Structure, alpha1: &Morphism, alpha2: &Morphism)
        -> Result<FreeAmalgam> {
        free_amalgamation(b1, b2, a, alpha1, alpha2)
    }
}

/// A structure `E` of the oracle's class with a homomorphism-embedding
/// `e: D → E` from the replayed trace, built copy by copy.
pub fn completion_of_tree_amalgamation(
    trace: &TreeAmalgamation,
    amalgamator: &dyn Amalgamator,
) -> Result<(Structure, Vec<usize>)> {
    let a = &trace.a;
    let d = &trace.structure;
    let id = a.language().identity();
    let mut e = a.clone();
    let mut map = vec![usize::MAX; d.len()];
    for (x, &v) in trace.copies[0].iter().enumerate() {
        map[v] = x;
    }
    for (i, step) in trace.steps.iter().enumerate() {
        let (overlap, onto): (Vec<usize>, Vec<usize>) = step.pairs.iter().copied().unzip();
        let (o, _) = a.induced_substructure(&overlap)?;
        let alpha1 = Morphism::new(
            id.clone(),
            onto.iter().enumerate().map(|(j, &y)| (j, map[trace.copies[step.parent][y]])).collect(),
        );
        let alpha2 = Morphism::new(id.clone(), overlap.iter().copied().enumerate().collect());
        let am = amalgamator
            .amalgamate(&e, a, &o, &alpha1, &alpha2)
            .map_err(|err| Error::Precondition(format!("amalgamation at step {i} failed: {err}")))?;
        for v in map.iter_mut().filter(|v| **v != usize::MAX) {
            *v = am.beta1[*v];
        }
        for (x, &v) in trace.copies[i + 1].iter().enumerate() {
            map[v] = am.beta2[x];
        }
        e = am.structure;
    }
    let m = Morphism::total(id, &map);
    check_morphism(&m, MorphismKind::HomomorphismEmbedding, d, &e)
        .map_err(|v| Error::Precondition(format!("completion map is not a homomorphism-embedding: {v}")))?;
    Ok((e, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::structure::StructureBuilder;
    use std::sync::Arc;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn irreducible_input_gives_one_copy() {
        let k2 = graph(2, &[(0, 1)]);
        let Decomposition::Tree { trace, .. } = decompose_tree_amalgamation(&k2, &k2, &Limits::default()).unwrap() else {
            panic!()
        };
        assert!(trace.steps().is_empty());
    }

    #[test]
    fn path_is_two_glued_edges() {
        let k2 = graph(2, &[(0, 1)]);
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let Decomposition::Tree { trace, embedding } = decompose_tree_amalgamation(&p3, &k2, &Limits::default()).unwrap()
        else {
            panic!()
        };
        assert_eq!(trace.steps().len(), 1);
        assert_eq!(trace.steps()[0].pairs.len(), 1);
        assert_eq!(trace.structure().len(), 3);
        assert_eq!(embedding.len(), 3);
        trace.validate().unwrap();
    }

    #[test]
    fn four_cycle_is_obstructed() {
        let k2 = graph(2, &[(0, 1)]);
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let out = decompose_tree_amalgamation(&c4, &k2, &Limits::default()).unwrap();
        assert!(matches!(out, Decomposition::Obstructed(TreeObstruction::InducedCycle(c)) if c == vec![0, 1, 2, 3]));
    }

    #[test]
    fn triangle_does_not_embed_into_an_edge() {
        let k2 = graph(2, &[(0, 1)]);
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let out = decompose_tree_amalgamation(&k3, &k2, &Limits::default()).unwrap();
        assert!(matches!(out, Decomposition::Obstructed(TreeObstruction::NotEmbeddable(_))));
    }

    #[test]
    fn star_and_forest() {
        let k2 = graph(2, &[(0, 1)]);
        let star = graph(5, &[(0, 1), (0, 2), (0, 3)]);
        let Decomposition::Tree { trace, .. } = decompose_tree_amalgamation(&star, &k2, &Limits::default()).unwrap() else {
            panic!()
        };
        // three edges plus one copy holding the isolated vertex
        assert_eq!(trace.copies().len(), 4);
        let (e, map) = completion_of_tree_amalgamation(&trace, &FreeAmalgamator).unwrap();
        assert_eq!(e.len(), trace.structure().len());
        assert_eq!(map.len(), e.len());
    }

    #[test]
    fn bad_overlap_is_rejected() {
        let lang = Arc::new(Language::relational(&[("E", 2), ("R", 2)]));
        let mut b = StructureBuilder::numbered(lang, 2);
        b.add_edge(0, 0, 1).add_tuple(1, &[0, 1]);
        let a = b.build().unwrap();
        let same = [GluingStep { parent: 0, pairs: vec![(0, 0), (1, 1)] }];
        let swapped = [GluingStep { parent: 0, pairs: vec![(0, 1), (1, 0)] }];
        assert_eq!(TreeAmalgamation::replay(&a, &same).unwrap().structure().len(), 2);
        assert!(TreeAmalgamation::replay(&a, &swapped).is_err());
    }
}
