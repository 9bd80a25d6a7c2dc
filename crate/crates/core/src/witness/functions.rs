//! Layer adding unary functions on top of a witness for the relational reduct.
//!
//! A vertex is a pair `(x, V)` where `x ∈ B₀` and `V` is a valuation structure
//! for `x`: a structure over the full language isomorphic to some closure
//! `Cl_A(y)` (possibly permuting symbols), with `x ∈ V` corresponding to `y`,
//! whose relational reduct is an induced substructure of `B₀`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{input, Error, Result};
use crate::language::GroupElement;
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::search::{for_each_embedding_indexed, SearchIndex};
use crate::structure::{Structure, StructureBuilder};
use crate::witness::relational::RelationalWitness;
use crate::witness::{check_partial_automorphism_of_copy, check_tuple_budget, check_vertex_budget, Extender, Witness};

/// A valuation structure. Relations are those induced by `B₀` on `vertices`;
/// `functions[f][i]` is the value of `f` at `vertices[i]`, as sorted `B₀` ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValuationStructure {
    pub owner: usize,
    pub vertices: Vec<usize>,
    pub functions: Vec<Vec<Vec<usize>>>,
}

impl ValuationStructure {
    fn local(&self, v: usize) -> usize {
        self.vertices.binary_search(&v).expect("vertex of the valuation structure")
    }

    pub fn function(&self, f: usize, v: usize) -> &[usize] {
        &self.functions[f][self.local(v)]
    }

    /// `Cl_V(y)` as a valuation structure for `y`.
    pub fn closure_of(&self, y: usize) -> ValuationStructure {
        let mut inside = vec![false; self.vertices.len()];
        let mut stack = vec![self.local(y)];
        inside[stack[0]] = true;
        while let Some(i) = stack.pop() {
            for f in &self.functions {
                for &w in &f[i] {
                    let j = self.local(w);
                    if !std::mem::replace(&mut inside[j], true) {
                        stack.push(j);
                    }
                }
            }
        }
        let keep: Vec<usize> = (0..self.vertices.len()).filter(|&i| inside[i]).collect();
        ValuationStructure {
            owner: y,
            vertices: keep.iter().map(|&i| self.vertices[i]).collect(),
            functions: self.functions.iter().map(|f| keep.iter().map(|&i| f[i].clone()).collect()).collect(),
        }
    }

    /// Image under `(g, map)`.
    fn transport(&self, g: &GroupElement, map: &[usize]) -> ValuationStructure {
        let mut pairs: Vec<(usize, usize)> = self.vertices.iter().enumerate().map(|(i, &v)| (map[v], i)).collect();
        pairs.sort_unstable();
        let vertices: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let mut functions = vec![Vec::new(); self.functions.len()];
        for (f, vals) in self.functions.iter().enumerate() {
            functions[g.fun(f)] = pairs
                .iter()
                .map(|&(_, i)| {
                    let mut w: Vec<usize> = vals[i].iter().map(|&v| map[v]).collect();
                    w.sort_unstable();
                    w
                })
                .collect();
        }
        ValuationStructure { owner: map[self.owner], vertices, functions }
    }
}

#[derive(Clone)]
pub struct FunctionWitness {
    base: Structure,
    b0: Arc<dyn Witness>,
    witness: Structure,
    psi: Vec<usize>,
    projection: Vec<usize>,
    valuations: Vec<ValuationStructure>,
    index: HashMap<ValuationStructure, usize>,
}

impl std::fmt::Debug for FunctionWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionWitness").field("vertices", &self.witness.len()).finish()
    }
}

impl FunctionWitness {
    /// Builds over the relational witness of the reduct `A⁻`.
    pub fn build(a: &Structure, limits: &Limits) -> Result<Self> {
        let b0 = RelationalWitness::build(&a.relational_reduct(), limits)?;
        Self::build_over(a, Arc::new(b0), limits)
    }

    /// Builds over a given witness `B₀` whose base is the relational reduct of `a`.
    pub fn build_over(a: &Structure, b0: Arc<dyn Witness>, limits: &Limits) -> Result<Self> {
        let lang = a.language();
        if b0.base() != &a.relational_reduct() {
            return input("base witness is not built over the relational reduct");
        }
        let bs = b0.structure();
        let psi0 = b0.embedding();
        let nrel = lang.relations().len();
        let all_rels: Vec<usize> = (0..nrel).collect();
        let index_b0 = SearchIndex::new(bs);
        let mut found: BTreeMap<ValuationStructure, ()> = BTreeMap::new();
        for y in 0..a.len() {
            let cl = a.closure(&[y])?;
            let (c, old) = a.induced_substructure(&cl)?;
            let cy = old.binary_search(&y).unwrap();
            let cminus = c.relational_reduct();
            let ic = SearchIndex::new(&cminus);
            for h in lang.group() {
                let hr = h.restrict(&all_rels, &[]).expect("relations are invariant");
                let mut err = None;
                for_each_embedding_indexed(&cminus, bs, &ic, &index_b0, &hr, &BTreeMap::new(), limits, &mut |j| {
                    let local = ValuationStructure {
                        owner: cy,
                        vertices: (0..c.len()).collect(),
                        functions: (0..lang.functions().len())
                            .map(|f| (0..c.len()).map(|i| c.function(f, i).to_vec()).collect())
                            .collect(),
                    };
                    found.insert(local.transport(h, j), ());
                    if found.len() > limits.max_enumeration {
                        err = Some(crate::error::limit("valuation structures", limits.max_enumeration as u64));
                        return true;
                    }
                    false
                })?;
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        check_vertex_budget(found.len() as u128, limits)?;
        // ordered by owner first
        let valuations: Vec<ValuationStructure> = found.into_keys().collect();
        let index: HashMap<ValuationStructure, usize> =
            valuations.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let projection: Vec<usize> = valuations.iter().map(|v| v.owner).collect();
        let mut fibres: Vec<Vec<usize>> = vec![Vec::new(); bs.len()];
        for (i, v) in valuations.iter().enumerate() {
            fibres[v.owner].push(i);
        }
        let names: Vec<String> = valuations
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}#{}", bs.name(v.owner), i - fibres[v.owner][0]))
            .collect();
        let mut b = StructureBuilder::new(lang.clone(), names);
        let mut count = 0usize;
        for r in 0..nrel {
            for t in bs.relation(r).iter() {
                let sizes: Vec<usize> = t.iter().map(|&x| fibres[x].len()).collect();
                let total: usize = sizes.iter().product();
                count = count.saturating_add(total);
                check_tuple_budget(count, limits)?;
                let mut out = vec![0; t.len()];
                for combo in 0..total {
                    let mut rest = combo;
                    for i in (0..t.len()).rev() {
                        out[i] = fibres[t[i]][rest % sizes[i]];
                        rest /= sizes[i];
                    }
                    b.add_tuple(r, &out);
                }
            }
        }
        for (i, v) in valuations.iter().enumerate() {
            for f in 0..lang.functions().len() {
                for &y in v.function(f, v.owner) {
                    let target = index
                        .get(&v.closure_of(y))
                        .ok_or_else(|| Error::Precondition("closure is not a valuation structure".into()))?;
                    b.add_function_value(f, i, *target);
                }
            }
        }
        let witness = b.build()?;
        let mut psi = Vec::with_capacity(a.len());
        for x in 0..a.len() {
            let cl = a.closure(&[x])?;
            let mut pairs: Vec<(usize, usize)> = cl.iter().map(|&z| (psi0[z], z)).collect();
            pairs.sort_unstable();
            let vs = ValuationStructure {
                owner: psi0[x],
                vertices: pairs.iter().map(|p| p.0).collect(),
                functions: (0..lang.functions().len())
                    .map(|f| {
                        pairs
                            .iter()
                            .map(|&(_, z)| {
                                let mut w: Vec<usize> = a.function(f, z).iter().map(|&u| psi0[u]).collect();
                                w.sort_unstable();
                                w
                            })
                            .collect()
                    })
                    .collect(),
            };
            psi.push(*index.get(&vs).ok_or_else(|| Error::Precondition("closure of A is not a valuation structure".into()))?);
        }
        Ok(FunctionWitness { base: a.clone(), b0, witness, psi, projection, valuations, index })
    }

    pub fn base_witness(&self) -> &Arc<dyn Witness> {
        &self.b0
    }

    pub fn valuation(&self, v: usize) -> &ValuationStructure {
        &self.valuations[v]
    }

    pub fn vertex_of(&self, v: &ValuationStructure) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// The structure `V` over the full language, vertices named as in `B₀`.
    pub fn valuation_structure(&self, v: usize) -> Result<Structure> {
        let val = &self.valuations[v];
        let (sub, _) = self.b0.structure().induced_substructure(&val.vertices)?;
        let mut b = StructureBuilder::new(self.base.language().clone(), sub.names().to_vec());
        for r in 0..sub.relations().len() {
            for t in sub.relation(r).iter() {
                b.add_tuple(r, t);
            }
        }
        for (f, vals) in val.functions.iter().enumerate() {
            for (i, ws) in vals.iter().enumerate() {
                for w in ws {
                    b.add_function_value(f, i, val.local(*w));
                }
            }
        }
        b.build()
    }

    /// Extension and the automorphism `φ̂` of `B₀` it was induced by.
    pub fn extend_pa(&self, phi: &Morphism) -> Result<(Morphism, Morphism)> {
        check_partial_automorphism_of_copy(self, phi)?;
        let lang = self.base.language();
        let all_rels: Vec<usize> = (0..lang.relations().len()).collect();
        let sym0 = phi.symbols.restrict(&all_rels, &[]).ok_or_else(|| Error::Input("bad symbols".into()))?;
        let phi0 = Morphism::new(sym0, phi.map.iter().map(|(&u, &v)| (self.projection[u], self.projection[v])).collect());
        let hat = self.b0.extend(&phi0)?;
        let hat_vec = hat.as_vec(self.b0.structure().len()).ok_or_else(|| Error::Precondition("base extension is not total".into()))?;
        let map = self
            .valuations
            .iter()
            .map(|v| {
                self.index
                    .get(&v.transport(&phi.symbols, &hat_vec))
                    .copied()
                    .ok_or_else(|| Error::Precondition("transported valuation structure missing".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((Morphism::total(phi.symbols.clone(), &map), hat))
    }
}

impl Extender for FunctionWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        Ok(self.extend_pa(phi)?.0)
    }
}

impl Witness for FunctionWitness {
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

    fn one_function(n: usize, values: &[(usize, usize)]) -> Structure {
        let lang = Arc::new(Language::new(vec![], vec!["F".into()], vec![]).unwrap());
        let mut b = StructureBuilder::numbered(lang, n);
        for &(v, w) in values {
            b.add_function_value(0, v, w);
        }
        b.build().unwrap()
    }

    #[test]
    fn relational_input_gives_singleton_valuations() {
        let lang = Arc::new(Language::relational(&[("R", 2)]));
        let mut b = StructureBuilder::numbered(lang, 2);
        b.add_tuple(0, &[0, 1]);
        let a = b.build().unwrap();
        let w = FunctionWitness::build(&a, &Limits::default()).unwrap();
        // only the loop-free half of the 16 base vertices looks like a vertex of A
        assert_eq!(w.structure().len(), 8);
        assert!(w.valuations.iter().all(|v| v.vertices.len() == 1));
        assert!(w.projection.iter().all(|&x| !w.b0.structure().has_tuple(0, &[x, x])));
    }

    #[test]
    fn over_a_graph_witness_the_layer_is_a_copy() {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 3);
        b.add_edge(0, 0, 1);
        let a = b.build().unwrap();
        let b0 = Arc::new(crate::witness::graph::GraphWitness::build(&a, &Limits::default()).unwrap());
        let w = FunctionWitness::build_over(&a, b0.clone(), &Limits::default()).unwrap();
        let pi = Morphism::total(a.language().identity(), &w.projection);
        assert_eq!(check_morphism(&pi, MorphismKind::Isomorphism, w.structure(), b0.structure()), Ok(()));
    }

    #[test]
    fn psi_carries_the_closure() {
        let a = one_function(2, &[(0, 1)]);
        let w = FunctionWitness::build(&a, &Limits::default()).unwrap();
        let v = w.valuation(w.embedding()[0]);
        assert_eq!(v.vertices.len(), 2);
        assert_eq!(w.structure().function(0, w.embedding()[0]), &[w.embedding()[1]]);
        assert_eq!(check_morphism(&crate::witness::embedding_morphism(&w), MorphismKind::Embedding, &a, w.structure()), Ok(()));
    }

    #[test]
    fn empty_and_identity_maps_extend_to_identity() {
        let a = one_function(2, &[(0, 1)]);
        let w = FunctionWitness::build(&a, &Limits::default()).unwrap();
        let id = a.language().identity();
        assert_eq!(w.extend(&Morphism::empty(id.clone())).unwrap(), Morphism::identity(w.structure()));
        let phi = Morphism::new(id, w.embedding().iter().map(|&v| (v, v)).collect());
        assert_eq!(w.extend(&phi).unwrap(), Morphism::identity(w.structure()));
    }

    #[test]
    fn symmetric_function_swap_extends() {
        let a = one_function(2, &[(0, 1), (1, 0)]);
        let w = FunctionWitness::build(&a, &Limits::default()).unwrap();
        let (p, q) = (w.embedding()[0], w.embedding()[1]);
        let phi = Morphism::new(a.language().identity(), [(p, q), (q, p)].into_iter().collect());
        let theta = w.extend(&phi).unwrap();
        assert!(theta.extends(&phi));
        assert_eq!(check_morphism(&theta, MorphismKind::Automorphism, w.structure(), w.structure()), Ok(()));
    }
}
