use std::collections::{BTreeMap, HashMap};

use crate::error::{input, limit, Result};
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::structure::{Structure, StructureBuilder};

/// Per vertex, the closure of that vertex (sorted).
fn vertex_closures(s: &Structure) -> Vec<Vec<usize>> {
    (0..s.len()).map(|v| s.closure(&[v]).expect("own vertex")).collect()
}

/// Sets whose pairs are "covered": closures of single vertices and closures of
/// relation tuples. A structure is irreducible iff every pair of its vertices
/// lies in one covering set.
fn covering_sets(s: &Structure, closures: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = closures.to_vec();
    for rel in s.relations() {
        for t in rel.iter() {
            let mut c: Vec<usize> = t.iter().flat_map(|&v| closures[v].iter().copied()).collect();
            c.sort_unstable();
            c.dedup();
            if c.len() > 1 {
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Adjacency of the "covered pair" relation, as bitsets over vertices.
fn covered_pairs(s: &Structure) -> Vec<Vec<u64>> {
    let n = s.len();
    let words = n.div_ceil(64).max(1);
    let mut adj = vec![vec![0u64; words]; n];
    let closures = vertex_closures(s);
    for c in covering_sets(s, &closures) {
        for &a in &c {
            for &b in &c {
                if a != b {
                    adj[a][b / 64] |= 1 << (b % 64);
                }
            }
        }
    }
    adj
}

/// Whether `s` is not the free amalgamation of two proper substructures.
///
/// Runs in polynomial time: `s` is reducible exactly when some pair `a, b` has
/// no vertex whose closure contains both and no tuple whose closure contains
/// both.
pub fn is_irreducible(s: &Structure) -> bool {
    let adj = covered_pairs(s);
    (0..s.len()).all(|a| (0..s.len()).all(|b| a == b || adj[a][b / 64] >> (b % 64) & 1 == 1))
}

/// All nonempty closed irreducible substructures, as sorted vertex sets in
/// lexicographic order.
pub fn enumerate_irreducible_substructures(s: &Structure, limits: &crate::Limits) -> Result<Vec<Vec<usize>>> {
    let n = s.len();
    let adj = covered_pairs(s);
    let nbrs: Vec<Vec<usize>> =
        (0..n).map(|a| (a + 1..n).filter(|&b| adj[a][b / 64] >> (b % 64) & 1 == 1).collect()).collect();
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (r, rel) in s.relations().iter().enumerate() {
        for (i, t) in rel.iter().enumerate() {
            let mut vs = t.to_vec();
            vs.sort_unstable();
            vs.dedup();
            for v in vs {
                incident[v].push((r, i));
            }
        }
    }
    let ctx = Ctx { s, adj: &adj, closures: vertex_closures(s), incident, limits };
    let mut out = Vec::new();
    let mut clique = Vec::new();
    let mut visited = 0usize;
    for v in 0..n {
        clique.push(v);
        grow(&ctx, &nbrs[v], &mut clique, &mut out, &mut visited)?;
        clique.pop();
    }
    out.sort();
    Ok(out)
}

struct Ctx<'a> {
    s: &'a Structure,
    adj: &'a [Vec<u64>],
    closures: Vec<Vec<usize>>,
    incident: Vec<Vec<(usize, usize)>>,
    limits: &'a crate::Limits,
}

impl Ctx<'_> {
    /// Irreducibility of the substructure on a closed sorted set.
    fn irreducible_set(&self, set: &[usize]) -> bool {
        let k = set.len();
        let pos = |v: usize| set.binary_search(&v).ok();
        let mut covered = vec![false; k * k];
        let mut mark = |c: &[usize]| {
            for &a in c {
                for &b in c {
                    if let (Some(i), Some(j)) = (pos(a), pos(b)) {
                        covered[i * k + j] = true;
                    }
                }
            }
        };
        for &v in set {
            mark(&self.closures[v]);
            for &(r, i) in &self.incident[v] {
                let t = self.s.relation(r).tuple(i);
                if t.iter().all(|&w| pos(w).is_some()) {
                    let c: Vec<usize> = t.iter().flat_map(|&w| self.closures[w].iter().copied()).collect();
                    mark(&c);
                }
            }
        }
        (0..k).all(|i| (0..k).all(|j| covered[i * k + j]))
    }
}

fn grow(ctx: &Ctx, candidates: &[usize], clique: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, visited: &mut usize) -> Result<()> {
    *visited += 1;
    if *visited > ctx.limits.max_enumeration {
        return Err(limit("irreducible substructure enumeration", ctx.limits.max_enumeration as u64));
    }
    if ctx.s.is_closed(clique) && ctx.irreducible_set(clique) {
        out.push(clique.clone());
    }
    for (i, &c) in candidates.iter().enumerate() {
        let rest: Vec<usize> =
            candidates[i + 1..].iter().copied().filter(|&d| ctx.adj[c][d / 64] >> (d % 64) & 1 == 1).collect();
        clique.push(c);
        grow(ctx, &rest, clique, out, visited)?;
        clique.pop();
    }
    Ok(())
}

/// Result of a free amalgamation: the amalgam and the two canonical embeddings.
#[derive(Debug, Clone)]
pub struct FreeAmalgam {
    pub structure: Structure,
    pub beta1: Vec<usize>,
    pub beta2: Vec<usize>,
}

/// Pushout of `b1` and `b2` identifying `α1(a)` with `α2(a)`; mixed tuples get
/// no relations and function values are united.
///
/// The maps must be injective, use identity symbols and be embeddings of the
/// relational reducts; vertices of `b2` keep their names unless those clash.
pub fn free_amalgamation(b1: &Structure, b2: &Structure, a: &Structure, alpha1: &Morphism, alpha2: &Morphism) -> Result<FreeAmalgam> {
    if b1.language() != b2.language() || a.language() != b1.language() {
        return input("free amalgamation needs one common language");
    }
    for (alpha, b) in [(alpha1, b1), (alpha2, b2)] {
        if !alpha.symbols.is_identity() {
            return input("amalgamation maps must use identity symbols");
        }
        let (ra, rb) = (a.relational_reduct(), b.relational_reduct());
        let reduct_map = Morphism::new(ra.language().identity(), alpha.map.clone());
        if let Err(v) = check_morphism(&reduct_map, MorphismKind::Embedding, &ra, &rb) {
            return input(format!("amalgamation map is not an embedding: {v}"));
        }
    }
    let shared: HashMap<usize, usize> = alpha2.map.iter().map(|(x, &y)| (y, alpha1.map[x])).collect();
    let mut names: Vec<String> = b1.names().to_vec();
    let mut taken: std::collections::HashSet<String> = names.iter().cloned().collect();
    let beta1: Vec<usize> = (0..b1.len()).collect();
    let mut beta2 = vec![0; b2.len()];
    for v in 0..b2.len() {
        if let Some(&w) = shared.get(&v) {
            beta2[v] = w;
        } else {
            let mut name = b2.name(v).to_string();
            while taken.contains(&name) {
                name.push('\'');
            }
            taken.insert(name.clone());
            beta2[v] = names.len();
            names.push(name);
        }
    }
    let mut builder = StructureBuilder::new(b1.language().clone(), names);
    for (b, beta) in [(b1, &beta1), (b2, &beta2)] {
        for (r, rel) in b.relations().iter().enumerate() {
            for t in rel.iter() {
                let u: Vec<usize> = t.iter().map(|&v| beta[v]).collect();
                builder.add_tuple(r, &u);
            }
        }
        for f in 0..b.language().functions().len() {
            for v in 0..b.len() {
                for &w in b.function(f, v) {
                    builder.add_function_value(f, beta[v], beta[w]);
                }
            }
        }
    }
    Ok(FreeAmalgam { structure: builder.build()?, beta1, beta2 })
}

/// Disjoint union, the free amalgamation over the empty structure.
pub fn disjoint_union(b1: &Structure, b2: &Structure) -> Result<FreeAmalgam> {
    let empty = Structure::empty(b1.language().clone(), vec![])?;
    let none = Morphism::new(b1.language().identity(), BTreeMap::new());
    free_amalgamation(b1, b2, &empty, &none, &none)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use std::sync::Arc;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn small_irreducibility_cases() {
        assert!(is_irreducible(&graph(1, &[])));
        assert!(!is_irreducible(&graph(2, &[])));
        assert!(is_irreducible(&graph(2, &[(0, 1)])));
        assert!(!is_irreducible(&graph(3, &[(0, 1), (1, 2)])));
    }

    #[test]
    fn function_edge_makes_pair_irreducible() {
        let lang = Arc::new(Language::new(vec![], vec!["F".into()], vec![]).unwrap());
        let mut b = StructureBuilder::numbered(lang, 2);
        b.add_function_value(0, 0, 1);
        assert!(is_irreducible(&b.build().unwrap()));
    }

    #[test]
    fn irreducibles_of_a_path_are_vertices_and_edges() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let irr = enumerate_irreducible_substructures(&p3, &crate::Limits::default()).unwrap();
        assert_eq!(irr, vec![vec![0], vec![0, 1], vec![1], vec![1, 2], vec![2]]);
    }

    #[test]
    fn gluing_two_edges_at_a_vertex_gives_a_path() {
        let k2 = graph(2, &[(0, 1)]);
        let a = graph(1, &[]);
        let id = k2.language().identity();
        let m1 = Morphism::new(id.clone(), [(0, 1)].into_iter().collect());
        let m2 = Morphism::new(id, [(0, 0)].into_iter().collect());
        let am = free_amalgamation(&k2, &k2, &a, &m1, &m2).unwrap();
        assert_eq!(am.structure.len(), 3);
        assert_eq!(am.structure.relation(0).len(), 4);
        assert!(!am.structure.has_tuple(0, &[0, 2]));
        assert_eq!(am.beta2, vec![1, 2]);
        assert_eq!(am.structure.names(), &["1", "2", "2'"]);
    }

    #[test]
    fn amalgamation_over_empty_structure_is_disjoint_union() {
        let k2 = graph(2, &[(0, 1)]);
        let u = disjoint_union(&k2, &k2).unwrap();
        assert_eq!(u.structure.len(), 4);
        assert_eq!(u.structure.relation(0).len(), 4);
    }

    #[test]
    fn glued_function_values_are_united() {
        let lang = Arc::new(Language::new(vec![], vec!["F".into()], vec![]).unwrap());
        let mut b = StructureBuilder::new(lang.clone(), vec!["a".into(), "x".into()]);
        b.add_function_value(0, 0, 1);
        let b1 = b.build().unwrap();
        let mut b = StructureBuilder::new(lang.clone(), vec!["a".into(), "y".into()]);
        b.add_function_value(0, 0, 1);
        let b2 = b.build().unwrap();
        let a = Structure::empty(lang.clone(), vec!["a".into()]).unwrap();
        let m = Morphism::new(lang.identity(), [(0, 0)].into_iter().collect());
        let am = free_amalgamation(&b1, &b2, &a, &m, &m).unwrap();
        assert_eq!(am.structure.function(0, 0), &[1, 2]);
    }
}
