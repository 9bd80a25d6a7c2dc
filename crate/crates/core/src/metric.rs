//! Integer-valued metric spaces as edge-labelled graphs: non-metric cycles,
//! shortest path completion, witnesses for metric spaces without unit cliques
//! and membership in classes given by forbidden substructures.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::irreducible::{free_amalgamation, FreeAmalgam};
use crate::language::Language;
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::pipeline::{build_pipeline_with_rounds, unwinding_rounds, PipelineWitness};
use crate::search::find_embedding;
use crate::structure::{Structure, StructureBuilder};
use crate::tree::Amalgamator;
use crate::witness::{Extender, SearchWitness, Witness};

/// Relational language `d1, …, dm` of binary symbols with the trivial group;
/// `dk` holds the pairs at distance `k`.
pub fn metric_language(m: u32) -> Language {
    let names: Vec<String> = (1..=m).map(|k| format!("d{k}")).collect();
    let rels: Vec<(&str, usize)> = names.iter().map(|n| (n.as_str(), 2)).collect();
    Language::relational(&rels)
}

/// Graph with positive integer labels on some unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLabelledGraph {
    n: usize,
    labels: BTreeMap<(usize, usize), u32>,
}

impl EdgeLabelledGraph {
    pub fn new(n: usize) -> Self {
        EdgeLabelledGraph { n, labels: BTreeMap::new() }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(x, y, d) in edges {
            g.set(x, y, d)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn set(&mut self, x: usize, y: usize, d: u32) -> Result<()> {
        if x == y || x >= self.n || y >= self.n || d == 0 {
            return input(format!("bad labelled edge {x}-{y} with label {d}"));
        }
        self.labels.insert((x.min(y), x.max(y)), d);
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u32> {
        self.labels.get(&(x.min(y), x.max(y))).copied()
    }

    /// Labelled pairs `(x, y, d)` with `x < y`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.labels.iter().map(|(&(x, y), &d)| (x, y, d))
    }

    /// The set of labels in use.
    pub fn distances(&self) -> BTreeSet<u32> {
        self.labels.values().copied().collect()
    }

    /// Reads a structure over `d1, …, dm`, which must be symmetric,
    /// irreflexive and put at most one label on each pair.
    pub fn from_structure(s: &Structure) -> Result<Self> {
        let lang = s.language();
        if !lang.functions().is_empty() || (0..lang.relations().len()).any(|r| lang.arity(r) != 2) {
            return input("metric structures have binary relations only");
        }
        let mut g = Self::new(s.len());
        for r in 0..lang.relations().len() {
            if !s.is_undirected_graph_relation(r) {
                return input(format!("relation {} is not symmetric and irreflexive", lang.relations()[r].name));
            }
            for t in s.relation(r).iter() {
                match g.get(t[0], t[1]) {
                    Some(d) if d != r as u32 + 1 => return input(format!("pair {}-{} has two labels", t[0], t[1])),
                    _ => g.set(t[0], t[1], r as u32 + 1)?,
                }
            }
        }
        Ok(g)
    }

    /// Encodes over `language`, whose `k`-th relation means distance `k + 1`.
    pub fn to_structure(&self, language: Arc<Language>, names: Vec<String>) -> Result<Structure> {
        let max = self.labels.values().copied().max().unwrap_or(0) as usize;
        if language.relations().len() < max {
            return input("language has too few distance symbols");
        }
        let mut b = StructureBuilder::new(language, names);
        if b.len() != self.n {
            return input("wrong number of vertex names");
        }
        for (x, y, d) in self.edges() {
            b.add_edge(d as usize - 1, x, y);
        }
        b.build()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (x, y, d) in self.edges() {
            adj[x].push((y, d));
            adj[y].push((x, d));
        }
        adj
    }

    /// Every pair labelled and every triangle inequality satisfied.
    pub fn is_metric(&self) -> bool {
        let n = self.n;
        for x in 0..n {
            for y in x + 1..n {
                let Some(dxy) = self.get(x, y) else { return false };
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (self.get(x, z), self.get(z, y)) {
                        if dxy > a + b {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Whether some `k` vertices are pairwise at distance 1.
    pub fn has_unit_clique(&self, k: usize) -> bool {
        let adj: Vec<BTreeSet<usize>> = self
            .adjacency()
            .into_iter()
            .map(|ns| ns.into_iter().filter(|&(_, d)| d == 1).map(|(y, _)| y).collect())
            .collect();
        fn grow(adj: &[BTreeSet<usize>], cand: Vec<usize>, size: usize, k: usize) -> bool {
            if size >= k {
                return true;
            }
            for (i, &v) in cand.iter().enumerate() {
                let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|w| adj[v].contains(w)).collect();
                if grow(adj, next, size + 1, k) {
                    return true;
                }
            }
            false
        }
        grow(&adj, (0..self.n).collect(), 0, k)
    }
}

/// A cycle `c₁ … cₙ` whose closing edge `{c₁, cₙ}` is longer than the rest of
/// the cycle together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonMetricCycle {
    pub vertices: Vec<usize>,
    /// `d(cᵢ, cᵢ₊₁)` for `i < n`, then `d(c₁, cₙ)`.
    pub labels: Vec<u32>,
}

/// Lightest path from `x` to `y` not using the edge `{x, y}`.
fn shortest_path_avoiding(adj: &[Vec<(usize, u32)>], x: usize, y: usize) -> Option<(u64, Vec<usize>)> {
    let n = adj.len();
    let mut dist = vec![u64::MAX; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[x] = 0;
    heap.push(Reverse((0u64, x)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            if (v == x && w == y) || (v == y && w == x) {
                continue;
            }
            let nd = d + l as u64;
            if nd < dist[w] {
                dist[w] = nd;
                prev[w] = v;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    if dist[y] == u64::MAX {
        return None;
    }
    let mut path = vec![y];
    while *path.last().unwrap() != x {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some((dist[y], path))
}

/// A non-metric cycle through the first labelled pair, in lexicographic
/// order, that closes one; `None` iff the graph has no non-metric cycle.
pub fn detect_non_metric_cycle(g: &EdgeLabelledGraph) -> Option<NonMetricCycle> {
    let adj = g.adjacency();
    for (x, y, d) in g.edges() {
        if let Some((len, path)) = shortest_path_avoiding(&adj, x, y) {
            if len < d as u64 {
                let mut labels: Vec<u32> = path.windows(2).map(|w| g.get(w[0], w[1]).unwrap()).collect();
                labels.push(d);
                return Some(NonMetricCycle { vertices: path, labels });
            }
        }
    }
    None
}

/// `d′(x, y) = min(m, lightest x–y path)` on all distinct pairs, where
/// `m = max(2, largest label)`.
pub fn shortest_path_completion(g: &EdgeLabelledGraph) -> EdgeLabelledGraph {
    let m = g.distances().into_iter().max().unwrap_or(0).max(2);
    shortest_path_completion_with(g, m)
}

/// As [`shortest_path_completion`] with an explicit cap `m`.
pub fn shortest_path_completion_with(g: &EdgeLabelledGraph, m: u32) -> EdgeLabelledGraph {
    let n = g.n;
    let mut d = vec![vec![m as u64; n]; n];
    for (x, y, l) in g.edges() {
        d[x][y] = d[x][y].min(l as u64);
        d[y][x] = d[x][y];
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let mut out = EdgeLabelledGraph::new(n);
    for x in 0..n {
        for y in x + 1..n {
            out.labels.insert((x, y), d[x][y].min(m as u64) as u32);
        }
    }
    out
}

/// Largest number of vertices of a non-metric cycle with labels in `s`, or 0
/// when there is none.
pub fn longest_non_metric_cycle(s: &BTreeSet<u32>) -> usize {
    let (Some(&lo), Some(&hi)) = (s.iter().next(), s.iter().next_back()) else {
        return 0;
    };
    // the other edges sum to less than the longest one
    let k = ((hi - 1) / lo) as usize + 1;
    if k >= 3 {
        k
    } else {
        0
    }
}

/// Free amalgamation followed by shortest path completion capped at `m`.
#[derive(Debug, Clone, Copy)]
pub struct MetricAmalgamator {
    pub m: u32,
}

impl Amalgamator for MetricAmalgamator {
    fn amalgamate(&self, b1: &Structure, b2: &Structure, a: &Structure, alpha1: &Morphism, alpha2: &Morphism)
        -> Result<FreeAmalgam> {
        let am = free_amalgamation(b1, b2, a, alpha1, alpha2)?;
        let g = EdgeLabelledGraph::from_structure(&am.structure)?;
        if let Some(c) = detect_non_metric_cycle(&g) {
            return Err(Error::Precondition(format!("free amalgam has a non-metric cycle {:?}", c.vertices)));
        }
        let done = shortest_path_completion_with(&g, self.m);
        let structure = done.to_structure(am.structure.language().clone(), am.structure.names().to_vec())?;
        Ok(FreeAmalgam { structure, ..am })
    }
}

/// A metric EPPA-witness: the pipeline witness over the metric encoding,
/// completed by shortest paths.
pub struct MetricWitness {
    pipeline: PipelineWitness,
    base: Structure,
    structure: Structure,
    graph: EdgeLabelledGraph,
}

impl std::fmt::Debug for MetricWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricWitness").field("pipeline", &self.pipeline).field("vertices", &self.graph.n).finish()
    }
}

fn check_metric_input(a: &EdgeLabelledGraph, n: usize) -> Result<()> {
    if !a.is_metric() {
        return input("A is not a metric space");
    }
    if n >= 1 && a.has_unit_clique(n) {
        return input(format!("A contains {n} points pairwise at distance 1"));
    }
    Ok(())
}

/// The structure of `a` over `d1, …, dm` with `m = max(2, largest label)`.
pub fn metric_structure(a: &EdgeLabelledGraph) -> Result<Structure> {
    let m = a.distances().into_iter().max().unwrap_or(0).max(2);
    a.to_structure(Arc::new(metric_language(m)), (1..=a.len()).map(|i| i.to_string()).collect())
}

/// Witness for a metric space `a` without `n` points pairwise at distance 1,
/// using `a` itself as the base witness.
pub fn build_metric_witness(a: &EdgeLabelledGraph, n: usize, limits: &Limits) -> Result<MetricWitness> {
    let base = a.clone();
    let embedding: Vec<usize> = (0..a.len()).collect();
    build_metric_witness_over(a, n, &base, &embedding, limits)
}

/// As [`build_metric_witness`] over an explicit base witness `b0` containing
/// `a` at `embedding`; whether `b0` is a witness is checked by the verifier.
pub fn build_metric_witness_over(
    a: &EdgeLabelledGraph,
    n: usize,
    b0: &EdgeLabelledGraph,
    embedding: &[usize],
    limits: &Limits,
) -> Result<MetricWitness> {
    check_metric_input(a, n)?;
    check_metric_input(b0, n)?;
    let s = a.distances();
    if !b0.distances().is_subset(&s) {
        return input("base uses distances that A does not");
    }
    let sa = metric_structure(a)?;
    let lang = sa.language().clone();
    let sb = b0.to_structure(lang.clone(), (1..=b0.len()).map(|i| i.to_string()).collect())?;
    let base: Arc<dyn Witness> = Arc::new(SearchWitness::new(sa.clone(), sb, embedding.to_vec(), *limits)?);
    let bound = longest_non_metric_cycle(&s);
    let rounds = if bound >= 3 { unwinding_rounds(bound) } else { 0 };
    let pipeline = build_pipeline_with_rounds(base, rounds, limits)?;
    let g = EdgeLabelledGraph::from_structure(pipeline.structure())?;
    if let Some(c) = detect_non_metric_cycle(&g) {
        return Err(Error::Precondition(format!("witness has a non-metric cycle {:?}", c.vertices)));
    }
    let m = s.iter().copied().max().unwrap_or(0).max(2);
    let graph = shortest_path_completion_with(&g, m);
    let structure = graph.to_structure(lang, pipeline.structure().names().to_vec())?;
    Ok(MetricWitness { pipeline, base: sa, structure, graph })
}

impl MetricWitness {
    pub fn pipeline(&self) -> &PipelineWitness {
        &self.pipeline
    }

    pub fn graph(&self) -> &EdgeLabelledGraph {
        &self.graph
    }
}

impl Extender for MetricWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        self.pipeline.extend(phi)
    }
}

impl Witness for MetricWitness {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.structure
    }
    fn embedding(&self) -> &[usize] {
        self.pipeline.embedding()
    }
    fn projection(&self) -> Option<&[usize]> {
        self.pipeline.projection()
    }
}

/// Whether no structure of `forbidden` embeds into `b` (with any symbol
/// permutation of the group).
pub fn check_free_amalgamation_membership(forbidden: &[Structure], b: &Structure, limits: &Limits) -> Result<bool> {
    for f in forbidden {
        if f.language() != b.language() {
            return input("forbidden structure uses another language");
        }
        if find_embedding(f, b, false, limits)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{completion_of_tree_amalgamation, decompose_tree_amalgamation, Decomposition};

    fn g(n: usize, e: &[(usize, usize, u32)]) -> EdgeLabelledGraph {
        EdgeLabelledGraph::from_edges(n, e).unwrap()
    }

    #[test]
    fn triangles() {
        assert!(detect_non_metric_cycle(&g(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 3)])).is_some());
        assert!(detect_non_metric_cycle(&g(3, &[(0, 1, 1), (1, 2, 2), (0, 2, 2)])).is_none());
        assert!(detect_non_metric_cycle(&g(3, &[(0, 1, 1), (1, 2, 3)])).is_none());
    }

    #[test]
    fn completion_examples() {
        assert_eq!(shortest_path_completion(&g(2, &[(0, 1, 1)])).get(0, 1), Some(1));
        assert_eq!(shortest_path_completion(&g(3, &[(0, 1, 1), (1, 2, 1)])).get(0, 2), Some(2));
        // a disconnected pair gets the cap
        assert_eq!(shortest_path_completion_with(&g(2, &[]), 3).get(0, 1), Some(3));
    }

    #[test]
    fn non_metric_cycle_bounds() {
        assert_eq!(longest_non_metric_cycle(&[1, 2].into()), 0);
        assert_eq!(longest_non_metric_cycle(&[1, 3].into()), 3);
        assert_eq!(longest_non_metric_cycle(&[1, 2, 3].into()), 3);
        assert_eq!(longest_non_metric_cycle(&[1, 4].into()), 4);
    }

    #[test]
    fn isosceles_triangle_over_two_unit_edges() {
        let a = g(3, &[(0, 1, 1), (0, 2, 2), (1, 2, 2)]);
        let b0 = g(4, &[(0, 1, 1), (2, 3, 1), (0, 2, 2), (0, 3, 2), (1, 2, 2), (1, 3, 2)]);
        let w = build_metric_witness_over(&a, 3, &b0, &[0, 1, 2], &Limits::default()).unwrap();
        assert!(w.graph().is_metric());
        assert!(!w.graph().has_unit_clique(3));
        assert_eq!(w.structure().len(), 12);
    }

    #[test]
    fn unit_cliques() {
        let k3 = g(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        assert!(k3.has_unit_clique(3));
        assert!(build_metric_witness(&k3, 3, &Limits::default()).is_err());
        assert!(!g(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 2)]).has_unit_clique(3));
    }

    #[test]
    fn two_points_at_distance_one() {
        let w = build_metric_witness(&g(2, &[(0, 1, 1)]), 3, &Limits::default()).unwrap();
        assert!(w.graph().is_metric());
        assert_eq!(w.structure().len(), 2);
    }

    #[test]
    fn path_completes_to_three_points() {
        let a = metric_structure(&g(2, &[(0, 1, 1)])).unwrap();
        let p3 = g(3, &[(0, 1, 1), (1, 2, 1)]).to_structure(a.language().clone(), vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let Decomposition::Tree { trace, .. } = decompose_tree_amalgamation(&p3, &a, &Limits::default()).unwrap() else {
            panic!()
        };
        let (e, _) = completion_of_tree_amalgamation(&trace, &MetricAmalgamator { m: 2 }).unwrap();
        let eg = EdgeLabelledGraph::from_structure(&e).unwrap();
        assert!(eg.is_metric());
        assert_eq!(eg.len(), 3);
        assert_eq!(eg.distances(), [1, 2].into());
    }

    #[test]
    fn forbidden_triangle() {
        let lang = Arc::new(Language::graph());
        let mut b = StructureBuilder::numbered(lang.clone(), 3);
        b.add_edge(0, 0, 1).add_edge(0, 1, 2).add_edge(0, 0, 2);
        let k3 = b.build().unwrap();
        assert!(!check_free_amalgamation_membership(&[k3.clone()], &k3, &Limits::default()).unwrap());
        assert!(check_free_amalgamation_membership(&[], &k3, &Limits::default()).unwrap());
    }
}
