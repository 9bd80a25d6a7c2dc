#![allow(dead_code)]

use std::sync::Arc;

use eppa::language::{GroupElement, Language, RelationSymbol};
use eppa::verify::{verify_coherence, verify_eppa_witness, VerifyReport};
use eppa::witness::Witness;
use eppa::{Limits, Structure, StructureBuilder};

pub fn limits() -> Limits {
    Limits::default()
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
    for &(x, y) in edges {
        b.add_edge(0, x, y);
    }
    b.build().unwrap()
}

/// Every labelled simple graph on `0..n`.
pub fn labelled_graphs(n: usize) -> Vec<Structure> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    (0..1usize << pairs.len())
        .map(|code| {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| code >> i & 1 == 1).map(|(_, &p)| p).collect();
            graph(n, &edges)
        })
        .collect()
}

fn sym(name: &str, arity: usize) -> RelationSymbol {
    RelationSymbol { name: name.into(), arity }
}

/// One binary relation `R` and one unary relation `U`.
pub fn binary_unary() -> Arc<Language> {
    Arc::new(Language::relational(&[("R", 2), ("U", 1)]))
}

/// Two unary relations exchanged by the group.
pub fn swapped_unaries() -> Arc<Language> {
    let swap = GroupElement::new(vec![1, 0], vec![]).unwrap();
    Arc::new(Language::new(vec![sym("P", 1), sym("Q", 1)], vec![], vec![GroupElement::identity(2, 0), swap]).unwrap())
}

/// One binary relation `R` and one unary function `F`.
pub fn relation_and_function() -> Arc<Language> {
    Arc::new(Language::new(vec![sym("R", 2)], vec!["F".into()], vec![]).unwrap())
}

/// Structures on `0..n` whose tuples are read from the bits of `code`,
/// relation by relation in the order of all tuples of each arity.
pub fn from_code(lang: &Arc<Language>, n: usize, code: u64) -> Structure {
    let mut b = StructureBuilder::numbered(lang.clone(), n);
    let mut bit = 0;
    for (r, s) in lang.relations().iter().enumerate() {
        for t in tuples(n, s.arity) {
            if code >> bit & 1 == 1 {
                b.add_tuple(r, &t);
            }
            bit += 1;
        }
    }
    b.build().unwrap()
}

pub fn code_bits(lang: &Language, n: usize) -> u32 {
    lang.relations().iter().map(|s| n.pow(s.arity as u32) as u32).sum()
}

pub fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|t| (0..n).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    out
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Whether `s` is the least member of its isomorphism class among
/// relabellings of its vertices, comparing sorted tuple lists.
pub fn is_canonical(s: &Structure) -> bool {
    let key = |p: &[usize]| -> Vec<Vec<Vec<usize>>> {
        let mut k: Vec<Vec<Vec<usize>>> = s
            .relations()
            .iter()
            .map(|r| {
                let mut ts: Vec<Vec<usize>> = r.iter().map(|t| t.iter().map(|&x| p[x]).collect()).collect();
                ts.sort();
                ts
            })
            .collect();
        for f in 0..s.language().functions().len() {
            let mut vals = vec![vec![]; s.len()];
            for v in 0..s.len() {
                let mut w: Vec<usize> = s.function(f, v).iter().map(|&x| p[x]).collect();
                w.sort();
                vals[p[v]] = w;
            }
            k.push(vals);
        }
        k
    };
    let id: Vec<usize> = (0..s.len()).collect();
    let mine = key(&id);
    permutations(s.len()).iter().all(|p| key(p) >= mine)
}

/// EPPA through the constructive extender, EPPA by search, and optionally
/// coherence. Returns the constructive report, the search report and the
/// coherence report.
pub fn check_witness(a: &Structure, w: &dyn Witness, coherence: bool) -> (VerifyReport, VerifyReport, Option<VerifyReport>) {
    let l = limits();
    let constructive = verify_eppa_witness(a, w.structure(), w.embedding(), Some(w), &l).unwrap();
    let search = verify_eppa_witness(a, w.structure(), w.embedding(), None, &l).unwrap();
    let coh = coherence.then(|| verify_coherence(a, w.structure(), w.embedding(), w, &l).unwrap());
    (constructive, search, coh)
}

/// Partial automorphisms of `a` carried to `ψ(A)`.
pub fn copy_partial_automorphisms(a: &Structure, psi: &[usize]) -> Vec<eppa::Morphism> {
    eppa::search::enumerate_partial_automorphisms(a, &limits())
        .unwrap()
        .into_iter()
        .map(|p| eppa::Morphism::new(p.symbols.clone(), p.map.iter().map(|(&x, &y)| (psi[x], psi[y])).collect()))
        .collect()
}

/// For every partial automorphism of `ψ(A)`: whether the constructive
/// extension is a valid automorphism extending it, and whether search finds
/// one. Returns the number of maps compared and the first disagreement.
pub fn extender_agrees_with_search(a: &Structure, w: &dyn Witness) -> (usize, Option<eppa::Morphism>) {
    use eppa::{check_morphism, MorphismKind};
    let b = w.structure();
    let index = eppa::search::SearchIndex::new(b);
    let pas = copy_partial_automorphisms(a, w.embedding());
    for phi in &pas {
        let constructive = match w.extend(phi) {
            Ok(t) => t.extends(phi) && check_morphism(&t, MorphismKind::Automorphism, b, b).is_ok(),
            Err(_) => false,
        };
        let searched = eppa::search::extend_to_automorphism_indexed(b, &index, phi, &limits()).unwrap().is_some();
        if constructive != searched {
            return (pas.len(), Some(phi.clone()));
        }
    }
    (pas.len(), None)
}
