use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::error::{input, Error, Result};
use crate::language::{GroupElement, Language};

/// Tuples of one relation, stored flat and sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    data: Vec<usize>,
}

impl Relation {
    fn from_unsorted(arity: usize, data: Vec<usize>) -> Self {
        let mut tuples: Vec<&[usize]> = data.chunks(arity).collect();
        tuples.sort_unstable();
        tuples.dedup();
        let data = tuples.concat();
        Relation { arity, data }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> std::slice::Chunks<'_, usize> {
        self.data.chunks(self.arity)
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        if t.len() != self.arity {
            return false;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(t) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// Finite structure over a [`Language`]: vertices `0..len()` carrying names,
/// relation contents and unary set-valued functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    language: Arc<Language>,
    names: Vec<String>,
    relations: Vec<Relation>,
    functions: Vec<Vec<Vec<usize>>>,
}

/// Accumulates content, then sorts and validates it in [`StructureBuilder::build`].
pub struct StructureBuilder {
    language: Arc<Language>,
    names: Vec<String>,
    relations: Vec<Vec<usize>>,
    functions: Vec<Vec<Vec<usize>>>,
}

impl StructureBuilder {
    pub fn new(language: Arc<Language>, names: Vec<String>) -> Self {
        let n = names.len();
        StructureBuilder {
            relations: vec![Vec::new(); language.relations().len()],
            functions: vec![vec![Vec::new(); n]; language.functions().len()],
            language,
            names,
        }
    }

    /// Builder with vertices named `1..=n`.
    pub fn numbered(language: Arc<Language>, n: usize) -> Self {
        Self::new(language, (1..=n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn add_tuple(&mut self, r: usize, t: &[usize]) -> &mut Self {
        self.relations[r].extend_from_slice(t);
        self
    }

    /// Adds the tuple and its reverse.
    pub fn add_edge(&mut self, r: usize, x: usize, y: usize) -> &mut Self {
        self.add_tuple(r, &[x, y]).add_tuple(r, &[y, x])
    }

    pub fn add_function_value(&mut self, f: usize, v: usize, w: usize) -> &mut Self {
        self.functions[f][v].push(w);
        self
    }

    pub fn build(self) -> Result<Structure> {
        let n = self.names.len();
        let mut seen = HashSet::new();
        for name in &self.names {
            if !seen.insert(name.as_str()) {
                return input(format!("duplicate vertex {name}"));
            }
        }
        let mut relations = Vec::with_capacity(self.relations.len());
        for (r, data) in self.relations.into_iter().enumerate() {
            let arity = self.language.arity(r);
            if data.len() % arity != 0 {
                return input(format!("relation {} received a tuple of wrong arity", r));
            }
            if data.iter().any(|&v| v >= n) {
                return input("relation tuple mentions an unknown vertex");
            }
            relations.push(Relation::from_unsorted(arity, data));
        }
        let mut functions = self.functions;
        for values in functions.iter_mut().flatten() {
            if values.iter().any(|&w| w >= n) {
                return input("function value mentions an unknown vertex");
            }
            values.sort_unstable();
            values.dedup();
        }
        Ok(Structure { language: self.language, names: self.names, relations, functions })
    }
}

impl Structure {
    /// Structure with no relation tuples and empty function values.
    pub fn empty(language: Arc<Language>, names: Vec<String>) -> Result<Self> {
        StructureBuilder::new(language, names).build()
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
    }

    pub fn relation(&self, r: usize) -> &Relation {
        &self.relations[r]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn has_tuple(&self, r: usize, t: &[usize]) -> bool {
        self.relations[r].contains(t)
    }

    /// Value of function `f` at `v`, sorted ascending.
    pub fn function(&self, f: usize, v: usize) -> &[usize] {
        &self.functions[f][v]
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(Relation::len).sum()
    }

    fn check_vertices(&self, xs: &[usize]) -> Result<()> {
        match xs.iter().find(|&&x| x >= self.len()) {
            Some(x) => input(format!("unknown vertex {x}")),
            None => Ok(()),
        }
    }

    /// Least function-closed superset of `xs`, sorted.
    pub fn closure(&self, xs: &[usize]) -> Result<Vec<usize>> {
        self.check_vertices(xs)?;
        let mut inside = vec![false; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &x in xs {
            if !std::mem::replace(&mut inside[x], true) {
                stack.push(x);
            }
        }
        while let Some(v) = stack.pop() {
            for f in &self.functions {
                for &w in &f[v] {
                    if !std::mem::replace(&mut inside[w], true) {
                        stack.push(w);
                    }
                }
            }
        }
        Ok((0..self.len()).filter(|&v| inside[v]).collect())
    }

    pub fn is_closed(&self, xs: &[usize]) -> bool {
        let set: HashSet<usize> = xs.iter().copied().collect();
        xs.iter().all(|&v| self.functions.iter().all(|f| f[v].iter().all(|w| set.contains(w))))
    }

    /// Substructure induced on a closed set. Vertices keep their names and are
    /// listed in the order of `self`; the second component maps new to old ids.
    pub fn induced_substructure(&self, xs: &[usize]) -> Result<(Structure, Vec<usize>)> {
        self.check_vertices(xs)?;
        let mut old: Vec<usize> = xs.to_vec();
        old.sort_unstable();
        old.dedup();
        let mut new_of = vec![usize::MAX; self.len()];
        for (i, &v) in old.iter().enumerate() {
            new_of[v] = i;
        }
        let names = old.iter().map(|&v| self.names[v].clone()).collect();
        let mut b = StructureBuilder::new(self.language.clone(), names);
        for (r, rel) in self.relations.iter().enumerate() {
            for t in rel.iter() {
                if t.iter().all(|&v| new_of[v] != usize::MAX) {
                    let u: Vec<usize> = t.iter().map(|&v| new_of[v]).collect();
                    b.add_tuple(r, &u);
                }
            }
        }
        for (f, fun) in self.functions.iter().enumerate() {
            for (i, &v) in old.iter().enumerate() {
                for &w in &fun[v] {
                    if new_of[w] == usize::MAX {
                        return Err(Error::ClosureViolation { vertex: v });
                    }
                    b.add_function_value(f, i, new_of[w]);
                }
            }
        }
        Ok((b.build()?, old))
    }

    /// Homomorphic image under `(sym, map)` on a vertex set named `names`.
    pub fn image(&self, sym: &GroupElement, map: &[usize], names: Vec<String>) -> Result<Structure> {
        let mut b = StructureBuilder::new(self.language.clone(), names);
        if map.len() != self.len() || map.iter().any(|&v| v >= b.len()) {
            return input("image map is not total into the target vertex set");
        }
        let mut buf = Vec::new();
        for (r, rel) in self.relations.iter().enumerate() {
            for t in rel.iter() {
                buf.clear();
                buf.extend(t.iter().map(|&v| map[v]));
                b.add_tuple(sym.rel(r), &buf);
            }
        }
        for (f, fun) in self.functions.iter().enumerate() {
            for (v, vals) in fun.iter().enumerate() {
                for &w in vals {
                    b.add_function_value(sym.fun(f), map[v], map[w]);
                }
            }
        }
        b.build()
    }

    /// The relabelling `(g, id)(S)`: the content of `R` becomes the content of `g⁻¹(R)`.
    pub fn relabel(&self, g: &GroupElement) -> Result<Structure> {
        if !self.language.contains(g) {
            return input("group element not in the language's group");
        }
        let id: Vec<usize> = (0..self.len()).collect();
        self.image(g, &id, self.names.clone())
    }

    /// Orbit under relabelling, deduplicated by exact equality, in group order.
    pub fn relabelling_orbit(&self) -> Vec<Structure> {
        let mut out: Vec<Structure> = Vec::new();
        for g in self.language.group() {
            let s = self.relabel(g).expect("group element of own language");
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    /// Same vertices and content over a sublanguage given by kept symbol lists.
    pub fn reduct(&self, language: Arc<Language>, rels: &[usize], funs: &[usize]) -> Result<Structure> {
        if language.relations().len() != rels.len() || language.functions().len() != funs.len() {
            return input("reduct language does not match the kept symbols");
        }
        let mut b = StructureBuilder::new(language, self.names.clone());
        for (i, &r) in rels.iter().enumerate() {
            for t in self.relations[r].iter() {
                b.add_tuple(i, t);
            }
        }
        for (i, &f) in funs.iter().enumerate() {
            for v in 0..self.len() {
                for &w in &self.functions[f][v] {
                    b.add_function_value(i, v, w);
                }
            }
        }
        b.build()
    }

    /// Relational reduct (functions dropped, group restricted).
    pub fn relational_reduct(&self) -> Structure {
        let lang = Arc::new(self.language.relational_reduct());
        let rels: Vec<usize> = (0..self.relations.len()).collect();
        self.reduct(lang, &rels, &[]).expect("relational reduct")
    }

    /// Copy over `language` (which must extend this language by one trailing
    /// relation) with `tuples` as that relation's content.
    pub fn with_extra_relation(&self, language: Arc<Language>, tuples: &[Vec<usize>]) -> Result<Structure> {
        let k = self.relations.len();
        if language.relations().len() != k + 1 || language.functions() != self.language.functions() {
            return input("language does not extend by exactly one relation");
        }
        let mut b = StructureBuilder::new(language, self.names.clone());
        for (r, rel) in self.relations.iter().enumerate() {
            for t in rel.iter() {
                b.add_tuple(r, t);
            }
        }
        for t in tuples {
            b.add_tuple(k, t);
        }
        for (f, fun) in self.functions.iter().enumerate() {
            for (v, vals) in fun.iter().enumerate() {
                for &w in vals {
                    b.add_function_value(f, v, w);
                }
            }
        }
        b.build()
    }

    /// Gaifman adjacency: vertices sharing a tuple, or joined by a function value.
    pub fn gaifman_neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.len()];
        for rel in &self.relations {
            for t in rel.iter() {
                for &a in t {
                    for &b in t {
                        if a != b {
                            adj[a].insert(b);
                        }
                    }
                }
            }
        }
        for fun in &self.functions {
            for (v, vals) in fun.iter().enumerate() {
                for &w in vals {
                    if v != w {
                        adj[v].insert(w);
                        adj[w].insert(v);
                    }
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Neighbourhoods of a binary relation treated as an undirected graph.
    pub fn binary_neighbours(&self, r: usize) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.len()];
        for t in self.relations[r].iter() {
            if t[0] != t[1] {
                adj[t[0]].insert(t[1]);
                adj[t[1]].insert(t[0]);
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Whether relation `r` is binary, symmetric and irreflexive.
    pub fn is_undirected_graph_relation(&self, r: usize) -> bool {
        self.language.arity(r) == 2
            && self.relations[r].iter().all(|t| t[0] != t[1] && self.has_tuple(r, &[t[1], t[0]]))
    }
}
