use std::collections::{BTreeSet, HashSet};

use crate::error::{input, Result};

/// A permutation of the symbols of a language, split by kind.
///
/// `rel[r]` is the image of relation `r`, `fun[f]` the image of function `f`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    rel: Vec<usize>,
    fun: Vec<usize>,
}

impl GroupElement {
    pub fn identity(relations: usize, functions: usize) -> Self {
        GroupElement { rel: (0..relations).collect(), fun: (0..functions).collect() }
    }

    pub fn new(rel: Vec<usize>, fun: Vec<usize>) -> Result<Self> {
        if !is_permutation(&rel) || !is_permutation(&fun) {
            return input("symbol map is not a permutation");
        }
        Ok(GroupElement { rel, fun })
    }

    pub fn rel(&self, r: usize) -> usize {
        self.rel[r]
    }

    pub fn fun(&self, f: usize) -> usize {
        self.fun[f]
    }

    pub fn relation_perm(&self) -> &[usize] {
        &self.rel
    }

    pub fn function_perm(&self) -> &[usize] {
        &self.fun
    }

    pub fn is_identity(&self) -> bool {
        self.rel.iter().enumerate().all(|(i, &j)| i == j)
            && self.fun.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            rel: other.rel.iter().map(|&r| self.rel[r]).collect(),
            fun: other.fun.iter().map(|&f| self.fun[f]).collect(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { rel: invert(&self.rel), fun: invert(&self.fun) }
    }

    /// Restriction to the kept symbols, renumbered by their position in the
    /// keep lists. The kept sets must be invariant.
    pub fn restrict(&self, rels: &[usize], funs: &[usize]) -> Option<GroupElement> {
        let pos = |list: &[usize], s: usize| list.iter().position(|&t| t == s);
        let rel = rels.iter().map(|&r| pos(rels, self.rel[r])).collect::<Option<Vec<_>>>()?;
        let fun = funs.iter().map(|&f| pos(funs, self.fun[f])).collect::<Option<Vec<_>>>()?;
        Some(GroupElement { rel, fun })
    }

    /// Same permutation with one extra relation appended as a fixed point.
    pub fn with_fixed_relation(&self) -> GroupElement {
        let mut rel = self.rel.clone();
        rel.push(rel.len());
        GroupElement { rel, fun: self.fun.clone() }
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        q[j] = i;
    }
    q
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// Finite relational language with unary functions and an explicit
/// permutation group on its symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    relations: Vec<RelationSymbol>,
    functions: Vec<String>,
    group: Vec<GroupElement>,
}

impl Language {
    /// Validates symbols and the group. An empty group means the trivial one.
    pub fn new(
        relations: Vec<RelationSymbol>,
        functions: Vec<String>,
        group: Vec<GroupElement>,
    ) -> Result<Self> {
        let mut names = HashSet::new();
        for name in relations.iter().map(|r| &r.name).chain(functions.iter()) {
            if name.is_empty() {
                return input("empty symbol name");
            }
            if !names.insert(name.clone()) {
                return input(format!("duplicate symbol {name}"));
            }
        }
        if let Some(r) = relations.iter().find(|r| r.arity == 0) {
            return input(format!("relation {} has arity 0", r.name));
        }
        let (nr, nf) = (relations.len(), functions.len());
        let group = if group.is_empty() { vec![GroupElement::identity(nr, nf)] } else { group };
        let mut seen = HashSet::new();
        for g in &group {
            if g.rel.len() != nr || g.fun.len() != nf {
                return input("group element has the wrong number of symbols");
            }
            if !is_permutation(&g.rel) || !is_permutation(&g.fun) {
                return input("group element is not a permutation");
            }
            if (0..nr).any(|r| relations[g.rel[r]].arity != relations[r].arity) {
                return input("group element does not preserve arities");
            }
            if !seen.insert(g.clone()) {
                return input("group lists an element twice");
            }
        }
        if !seen.contains(&GroupElement::identity(nr, nf)) {
            return input("group-not-closed: identity missing");
        }
        for g in &group {
            if !seen.contains(&g.inverse()) {
                return input("group-not-closed: inverse missing");
            }
            for h in &group {
                if !seen.contains(&g.compose(h)) {
                    return input("group-not-closed: product missing");
                }
            }
        }
        Ok(Language { relations, functions, group })
    }

    /// Relational language with the trivial group.
    pub fn relational(relations: &[(&str, usize)]) -> Self {
        let rels = relations
            .iter()
            .map(|&(n, a)| RelationSymbol { name: n.to_string(), arity: a })
            .collect();
        Language::new(rels, vec![], vec![]).expect("valid relational language")
    }

    /// Graph language: one binary relation `E`, trivial group.
    pub fn graph() -> Self {
        Language::relational(&[("E", 2)])
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[String] {
        &self.functions
    }

    pub fn arity(&self, r: usize) -> usize {
        self.relations[r].arity
    }

    pub fn group(&self) -> &[GroupElement] {
        &self.group
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.relations.len(), self.functions.len())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.group.contains(g)
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f == name)
    }

    /// Sublanguage on the kept symbols; the group is restricted and deduplicated.
    pub fn sublanguage(&self, rels: &[usize], funs: &[usize]) -> Result<Language> {
        let mut group = Vec::new();
        let mut seen = BTreeSet::new();
        for g in &self.group {
            let Some(h) = g.restrict(rels, funs) else {
                return input("kept symbols are not invariant under the group");
            };
            if seen.insert(h.clone()) {
                group.push(h);
            }
        }
        Language::new(
            rels.iter().map(|&r| self.relations[r].clone()).collect(),
            funs.iter().map(|&f| self.functions[f].clone()).collect(),
            group,
        )
    }

    /// Relations only, with the restricted group.
    pub fn relational_reduct(&self) -> Language {
        let rels: Vec<usize> = (0..self.relations.len()).collect();
        self.sublanguage(&rels, &[]).expect("relations are always invariant")
    }

    /// Appends a relation fixed by every group element.
    pub fn with_fixed_relation(&self, name: &str, arity: usize) -> Result<Language> {
        let mut relations = self.relations.clone();
        relations.push(RelationSymbol { name: name.to_string(), arity });
        let group = self.group.iter().map(GroupElement::with_fixed_relation).collect();
        Language::new(relations, self.functions.clone(), group)
    }
}
