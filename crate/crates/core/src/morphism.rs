use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::irreducible::enumerate_irreducible_substructures;
use crate::language::GroupElement;
use crate::limits::Limits;
use crate::structure::Structure;

/// A symbol permutation paired with a (possibly partial) vertex map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub symbols: GroupElement,
    pub map: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismKind {
    Homomorphism,
    Monomorphism,
    Embedding,
    Isomorphism,
    Automorphism,
    HomomorphismEmbedding,
    PartialAutomorphism,
}

/// First condition found violated by [`check_morphism`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LanguageMismatch,
    SymbolsNotInGroup,
    UnknownVertex(usize),
    NotTotal(usize),
    NotInjective(usize, usize),
    NotSurjective(usize),
    DomainNotClosed(usize),
    RangeNotClosed(usize),
    TupleNotPreserved { relation: String, tuple: Vec<usize> },
    TupleNotReflected { relation: String, tuple: Vec<usize> },
    FunctionNotPreserved { function: String, vertex: usize },
    FunctionNotReflected { function: String, vertex: usize },
    NotEmbeddingOnIrreducible(Vec<usize>),
    SearchLimit,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LanguageMismatch => write!(f, "source and target languages differ"),
            Violation::SymbolsNotInGroup => write!(f, "symbol permutation is not in the group"),
            Violation::UnknownVertex(v) => write!(f, "map mentions unknown vertex {v}"),
            Violation::NotTotal(v) => write!(f, "vertex {v} is not mapped"),
            Violation::NotInjective(a, b) => write!(f, "vertices {a} and {b} share an image"),
            Violation::NotSurjective(v) => write!(f, "vertex {v} is not in the image"),
            Violation::DomainNotClosed(v) => write!(f, "domain not closed at {v}"),
            Violation::RangeNotClosed(v) => write!(f, "range not closed at {v}"),
            Violation::TupleNotPreserved { relation, tuple } => {
                write!(f, "tuple {tuple:?} of {relation} is not preserved")
            }
            Violation::TupleNotReflected { relation, tuple } => {
                write!(f, "tuple {tuple:?} of {relation} in the image has no preimage tuple")
            }
            Violation::FunctionNotPreserved { function, vertex } => {
                write!(f, "function {function} at {vertex} is not preserved")
            }
            Violation::FunctionNotReflected { function, vertex } => {
                write!(f, "function {function} at {vertex} gains values in the image")
            }
            Violation::NotEmbeddingOnIrreducible(c) => {
                write!(f, "restriction to irreducible {c:?} is not an embedding")
            }
            Violation::SearchLimit => write!(f, "irreducible enumeration exceeded its cap"),
        }
    }
}

impl Morphism {
    pub fn new(symbols: GroupElement, map: BTreeMap<usize, usize>) -> Self {
        Morphism { symbols, map }
    }

    /// Total map given as a vector indexed by source vertex.
    pub fn total(symbols: GroupElement, map: &[usize]) -> Self {
        Morphism { symbols, map: map.iter().copied().enumerate().collect() }
    }

    pub fn identity(s: &Structure) -> Self {
        Morphism::total(s.language().identity(), &(0..s.len()).collect::<Vec<_>>())
    }

    pub fn empty(symbols: GroupElement) -> Self {
        Morphism { symbols, map: BTreeMap::new() }
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.map.get(&v).copied()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.map.keys().copied().collect()
    }

    /// Image set, sorted.
    pub fn range(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.map.values().copied().collect();
        r.sort_unstable();
        r
    }

    /// `self ∘ other` on the part of `other`'s domain that lands in `self`'s domain.
    pub fn compose(&self, other: &Morphism) -> Morphism {
        let map = other.map.iter().filter_map(|(&x, y)| self.map.get(y).map(|&z| (x, z))).collect();
        Morphism { symbols: self.symbols.compose(&other.symbols), map }
    }

    /// Inverse of an injective map.
    pub fn inverse(&self) -> Morphism {
        Morphism { symbols: self.symbols.inverse(), map: self.map.iter().map(|(&x, &y)| (y, x)).collect() }
    }

    pub fn restrict(&self, domain: &[usize]) -> Morphism {
        let map = domain.iter().filter_map(|&x| self.map.get(&x).map(|&y| (x, y))).collect();
        Morphism { symbols: self.symbols.clone(), map }
    }

    /// Whether `self` agrees with `other` on `other`'s domain and has the same symbols.
    pub fn extends(&self, other: &Morphism) -> bool {
        self.symbols == other.symbols && other.map.iter().all(|(x, y)| self.map.get(x) == Some(y))
    }

    /// Dense form of a total map on `n` vertices.
    pub fn as_vec(&self, n: usize) -> Option<Vec<usize>> {
        (0..n).map(|v| self.map.get(&v).copied()).collect()
    }
}

/// Checks the conditions of `kind` for `m: s → t`, returning the first
/// violation. For automorphisms and partial automorphisms `s` and `t` must be
/// the same structure.
pub fn check_morphism(m: &Morphism, kind: MorphismKind, s: &Structure, t: &Structure) -> std::result::Result<(), Violation> {
    use MorphismKind::*;
    let lang = s.language();
    if lang != t.language() {
        return Err(Violation::LanguageMismatch);
    }
    if !lang.contains(&m.symbols) {
        return Err(Violation::SymbolsNotInGroup);
    }
    for (&x, &y) in &m.map {
        if x >= s.len() {
            return Err(Violation::UnknownVertex(x));
        }
        if y >= t.len() {
            return Err(Violation::UnknownVertex(y));
        }
    }
    let total = !matches!(kind, PartialAutomorphism);
    if total {
        if let Some(v) = (0..s.len()).find(|v| !m.map.contains_key(v)) {
            return Err(Violation::NotTotal(v));
        }
    }
    let f = dense(&m.map, s.len());
    let mut inv = vec![usize::MAX; t.len()];
    let injective = !matches!(kind, Homomorphism | HomomorphismEmbedding);
    for (&x, &y) in &m.map {
        if inv[y] != usize::MAX && injective {
            return Err(Violation::NotInjective(inv[y], x));
        }
        inv[y] = x;
    }
    if matches!(kind, Isomorphism | Automorphism) {
        if let Some(v) = (0..t.len()).find(|&v| inv[v] == usize::MAX) {
            return Err(Violation::NotSurjective(v));
        }
    }
    if matches!(kind, Automorphism | PartialAutomorphism) && s != t {
        return Err(Violation::LanguageMismatch);
    }
    let g = &m.symbols;
    if matches!(kind, PartialAutomorphism) {
        let dom = m.domain();
        if let Some(v) = first_escape(s, &dom) {
            return Err(Violation::DomainNotClosed(v));
        }
        if let Some(v) = first_escape(t, &m.range()) {
            return Err(Violation::RangeNotClosed(v));
        }
    }
    // forward: tuples inside the domain are preserved
    let mut buf = Vec::new();
    for (r, rel) in s.relations().iter().enumerate() {
        for tup in rel.iter() {
            if tup.iter().any(|&v| f[v] == usize::MAX) {
                continue;
            }
            buf.clear();
            buf.extend(tup.iter().map(|&v| f[v]));
            if !t.has_tuple(g.rel(r), &buf) {
                return Err(Violation::TupleNotPreserved { relation: lang.relations()[r].name.clone(), tuple: tup.to_vec() });
            }
        }
    }
    let reflecting = matches!(kind, Embedding | Isomorphism | Automorphism | PartialAutomorphism);
    for fi in 0..lang.functions().len() {
        for (&x, &y) in &m.map {
            let image: Vec<usize> = s.function(fi, x).iter().map(|&w| f[w]).collect();
            let target = t.function(g.fun(fi), y);
            if image.iter().any(|w| *w == usize::MAX || target.binary_search(w).is_err()) {
                return Err(Violation::FunctionNotPreserved { function: lang.functions()[fi].clone(), vertex: x });
            }
            if reflecting && image.len() != target.len() {
                return Err(Violation::FunctionNotReflected { function: lang.functions()[fi].clone(), vertex: x });
            }
        }
    }
    if reflecting {
        let ginv = g.inverse();
        for (r2, rel) in t.relations().iter().enumerate() {
            for tup in rel.iter() {
                if tup.iter().any(|&v| inv[v] == usize::MAX) {
                    continue;
                }
                buf.clear();
                buf.extend(tup.iter().map(|&v| inv[v]));
                if !s.has_tuple(ginv.rel(r2), &buf) {
                    return Err(Violation::TupleNotReflected { relation: lang.relations()[r2].name.clone(), tuple: tup.to_vec() });
                }
            }
        }
    }
    if matches!(kind, HomomorphismEmbedding) {
        let Ok(irreducibles) = enumerate_irreducible_substructures(s, &Limits::default()) else {
            return Err(Violation::SearchLimit);
        };
        for c in irreducibles {
            let sub = m.restrict(&c);
            let ok = is_embedding_on(&sub, s, t);
            if !ok {
                return Err(Violation::NotEmbeddingOnIrreducible(c));
            }
        }
    }
    Ok(())
}

/// Whether a map defined on a closed set `c` of `s` is injective, reflects the
/// tuples of `t` inside its image, and preserves function values exactly.
fn is_embedding_on(m: &Morphism, s: &Structure, t: &Structure) -> bool {
    let mut inv = std::collections::HashMap::new();
    for (&x, &y) in &m.map {
        if inv.insert(y, x).is_some() {
            return false;
        }
    }
    let g = &m.symbols;
    let ginv = g.inverse();
    let mut buf = Vec::new();
    for (r2, rel) in t.relations().iter().enumerate() {
        for tup in rel.iter() {
            buf.clear();
            for v in tup {
                match inv.get(v) {
                    Some(&x) => buf.push(x),
                    None => break,
                }
            }
            if buf.len() == tup.len() && !s.has_tuple(ginv.rel(r2), &buf) {
                return false;
            }
        }
    }
    for fi in 0..s.language().functions().len() {
        for (&x, &y) in &m.map {
            if s.function(fi, x).len() != t.function(g.fun(fi), y).len() {
                return false;
            }
        }
    }
    true
}

fn dense(map: &BTreeMap<usize, usize>, n: usize) -> Vec<usize> {
    let mut f = vec![usize::MAX; n];
    for (&x, &y) in map {
        f[x] = y;
    }
    f
}

fn first_escape(s: &Structure, xs: &[usize]) -> Option<usize> {
    let mut inside = vec![false; s.len()];
    for &x in xs {
        inside[x] = true;
    }
    xs.iter().copied().find(|&v| (0..s.language().functions().len()).any(|f| s.function(f, v).iter().any(|&w| !inside[w])))
}

/// Partial injection given as pairs; rejects repeated sources or targets.
pub fn partial_injection(pairs: &[(usize, usize)]) -> Result<BTreeMap<usize, usize>> {
    let mut map = BTreeMap::new();
    let mut targets = std::collections::HashSet::new();
    for &(x, y) in pairs {
        if map.insert(x, y).is_some() || !targets.insert(y) {
            return input("map is not injective");
        }
    }
    Ok(map)
}
