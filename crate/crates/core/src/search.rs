//! Backtracking searches for isomorphisms, embeddings, automorphisms with
//! prescribed images and homomorphism-embeddings, pruned by neighbourhoods
//! and per-vertex relation profiles. Bijective searches also individualize
//! each choice and refine colours on both sides.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{limit, Result};
use crate::irreducible::enumerate_irreducible_substructures;
use crate::language::GroupElement;
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::structure::Structure;

const NONE: usize = usize::MAX;

/// Incidence data used to prune searches on one structure.
pub struct SearchIndex {
    incident: Vec<Vec<(usize, usize)>>,
    preimages: Vec<Vec<(usize, usize)>>,
    neighbours: Vec<Vec<usize>>,
    profile: Vec<Vec<u32>>,
    rel_offsets: Vec<usize>,
    fun_offset: usize,
}

impl SearchIndex {
    pub fn new(s: &Structure) -> Self {
        let n = s.len();
        let lang = s.language();
        let mut rel_offsets = Vec::new();
        let mut width = 0;
        for r in lang.relations() {
            rel_offsets.push(width);
            width += r.arity;
        }
        let fun_offset = width;
        width += 2 * lang.functions().len();
        let mut profile = vec![vec![0u32; width]; n];
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (r, rel) in s.relations().iter().enumerate() {
            for (i, t) in rel.iter().enumerate() {
                for (p, &v) in t.iter().enumerate() {
                    profile[v][rel_offsets[r] + p] += 1;
                    if !t[..p].contains(&v) {
                        incident[v].push((r, i));
                    }
                }
            }
        }
        let mut preimages: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for f in 0..lang.functions().len() {
            for v in 0..n {
                for &w in s.function(f, v) {
                    profile[v][fun_offset + 2 * f] += 1;
                    profile[w][fun_offset + 2 * f + 1] += 1;
                    preimages[w].push((f, v));
                }
            }
        }
        SearchIndex { incident, preimages, neighbours: s.gaifman_neighbours(), profile, rel_offsets, fun_offset }
    }

    fn same_profile(&self, v: usize, other: &SearchIndex, w: usize, g: &GroupElement, arities: &[usize]) -> bool {
        let (pv, pw) = (&self.profile[v], &other.profile[w]);
        for (r, &a) in arities.iter().enumerate() {
            let (o1, o2) = (self.rel_offsets[r], other.rel_offsets[g.rel(r)]);
            if pv[o1..o1 + a] != pw[o2..o2 + a] {
                return false;
            }
        }
        let nf = (pv.len() - self.fun_offset) / 2;
        (0..nf).all(|f| {
            let (o1, o2) = (self.fun_offset + 2 * f, other.fun_offset + 2 * g.fun(f));
            pv[o1..o1 + 2] == pw[o2..o2 + 2]
        })
    }
}

/// Colour refinement run on two structures side by side, with the relation
/// and function names of `t` pulled back along the symbol map so that equal
/// colours are comparable across the two.
struct Refiner {
    /// Per vertex of each side: `(label, tuple)` for every incident tuple,
    /// where the label packs the relation and the position of the vertex.
    cells: [Vec<Vec<(u32, u32)>>; 2],
    tuples: [Vec<Vec<usize>>; 2],
}

impl Refiner {
    fn new(s: &Structure, t: &Structure, g: &GroupElement) -> Self {
        let ginv = g.inverse();
        let side = |st: &Structure, rel: &dyn Fn(usize) -> usize, fun: &dyn Fn(usize) -> usize| {
            let nr = st.language().relations().len();
            let mut cells = vec![Vec::new(); st.len()];
            let mut tuples = Vec::new();
            let max_arity = st.language().relations().iter().map(|r| r.arity).max().unwrap_or(0).max(2);
            for (r, relation) in st.relations().iter().enumerate() {
                for t in relation.iter() {
                    let id = tuples.len() as u32;
                    for (p, &v) in t.iter().enumerate() {
                        cells[v].push(((rel(r) * max_arity + p) as u32, id));
                    }
                    tuples.push(t.to_vec());
                }
            }
            for f in 0..st.language().functions().len() {
                for v in 0..st.len() {
                    for &w in st.function(f, v) {
                        let id = tuples.len() as u32;
                        let label = ((nr + fun(f)) * max_arity) as u32;
                        cells[v].push((label, id));
                        cells[w].push((label + 1, id));
                        tuples.push(vec![v, w]);
                    }
                }
            }
            (cells, tuples)
        };
        let (cs, ts) = side(s, &|r| r, &|f| f);
        let (ct, tt) = side(t, &|r| ginv.rel(r), &|f| ginv.fun(f));
        Refiner { cells: [cs, ct], tuples: [ts, tt] }
    }

    /// Refines `colours` until the number of classes is stable; `false` when
    /// the two sides end up with different class sizes. Signatures are
    /// hashed, so a collision can only leave the partition coarser.
    fn refine(&self, colours: &mut [Vec<u32>; 2]) -> bool {
        fn mix(h: u64, x: u64) -> u64 {
            (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29)
        }
        let mut classes = usize::MAX;
        let mut sig = Vec::new();
        loop {
            let mut ids: HashMap<u64, u32> = HashMap::new();
            let mut next: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
            for side in 0..2 {
                let c = &colours[side];
                next[side] = (0..c.len())
                    .map(|v| {
                        sig.clear();
                        sig.extend(self.cells[side][v].iter().map(|&(label, id)| {
                            self.tuples[side][id as usize].iter().fold(label as u64 + 1, |h, &x| mix(h, c[x] as u64))
                        }));
                        sig.sort_unstable();
                        let key = sig.iter().fold(c[v] as u64, |h, &x| mix(h, x));
                        let fresh = ids.len() as u32;
                        *ids.entry(key).or_insert(fresh)
                    })
                    .collect();
            }
            let mut count = [vec![0usize; ids.len()], vec![0usize; ids.len()]];
            for side in 0..2 {
                for &c in &next[side] {
                    count[side][c as usize] += 1;
                }
            }
            if count[0] != count[1] {
                return false;
            }
            *colours = next;
            if ids.len() == classes {
                return true;
            }
            classes = ids.len();
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Bijection,
    Injection,
}

struct Search<'a> {
    s: &'a Structure,
    t: &'a Structure,
    is: &'a SearchIndex,
    it: &'a SearchIndex,
    g: &'a GroupElement,
    ginv: GroupElement,
    arities: Vec<usize>,
    mode: Mode,
    map: Vec<usize>,
    inv: Vec<usize>,
    order: Vec<usize>,
    fixed: Vec<usize>,
    allowed: Option<Vec<bool>>,
    constrained: Vec<bool>,
    nodes: u64,
    cap: u64,
    buf: Vec<usize>,
    refiner: Option<Refiner>,
    /// Current colours of both sides, present in bijection mode.
    colours: Option<[Vec<u32>; 2]>,
}

impl<'a> Search<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        s: &'a Structure,
        t: &'a Structure,
        is: &'a SearchIndex,
        it: &'a SearchIndex,
        g: &'a GroupElement,
        mode: Mode,
        partial: &BTreeMap<usize, usize>,
        constraint: Option<(&[usize], &[usize])>,
        cap: u64,
    ) -> Self {
        let mut fixed = vec![NONE; s.len()];
        for (&x, &y) in partial {
            fixed[x] = y;
        }
        let mut constrained = vec![false; s.len()];
        let allowed = constraint.map(|(xs, targets)| {
            for &x in xs {
                constrained[x] = true;
            }
            let mut a = vec![false; t.len()];
            for &y in targets {
                a[y] = true;
            }
            a
        });
        let mut order: Vec<usize> = partial.keys().copied().collect();
        if let Some((xs, _)) = constraint {
            for &x in xs {
                if fixed[x] == NONE && !order.contains(&x) {
                    order.push(x);
                }
            }
        }
        let mut placed = vec![false; s.len()];
        for &v in &order {
            placed[v] = true;
        }
        let mut queue: VecDeque<usize> = order.iter().copied().collect();
        loop {
            while let Some(v) = queue.pop_front() {
                for &w in &is.neighbours[v] {
                    if !placed[w] {
                        placed[w] = true;
                        order.push(w);
                        queue.push_back(w);
                    }
                }
            }
            match (0..s.len()).find(|&v| !placed[v]) {
                Some(v) => {
                    placed[v] = true;
                    order.push(v);
                    queue.push_back(v);
                }
                None => break,
            }
        }
        let arities = s.language().relations().iter().map(|r| r.arity).collect();
        Search {
            s,
            t,
            is,
            it,
            g,
            ginv: g.inverse(),
            arities,
            mode,
            map: vec![NONE; s.len()],
            inv: vec![NONE; t.len()],
            order,
            fixed,
            allowed,
            constrained,
            nodes: 0,
            cap,
            buf: Vec::new(),
            refiner: None,
            colours: None,
        }
    }

    /// Switches on colour refinement, individualizing the prescribed pairs.
    /// Returns `false` when refinement already rules out every bijection.
    fn with_refinement(&mut self, partial: &BTreeMap<usize, usize>) -> bool {
        let refiner = Refiner::new(self.s, self.t, self.g);
        let mut colours = [vec![0u32; self.s.len()], vec![0u32; self.t.len()]];
        let ok = refiner.refine(&mut colours);
        for (&x, &y) in partial {
            if !ok || colours[0][x] != colours[1][y] {
                return false;
            }
        }
        self.refiner = Some(refiner);
        self.colours = Some(colours);
        partial.iter().all(|(&x, &y)| self.individualize(x, y))
    }

    /// Gives `v` and `w` a colour of their own and refines, unless they
    /// already share a singleton class.
    fn individualize(&mut self, v: usize, w: usize) -> bool {
        let (Some(refiner), Some(colours)) = (&self.refiner, &mut self.colours) else { return true };
        let c = colours[0][v];
        if colours[0].iter().filter(|&&x| x == c).count() == 1 {
            return colours[1][w] == c;
        }
        let fresh = colours[0].iter().chain(colours[1].iter()).max().map_or(0, |m| m + 1);
        colours[0][v] = fresh;
        colours[1][w] = fresh;
        refiner.refine(colours)
    }

    fn candidates(&self, v: usize) -> Vec<usize> {
        if self.fixed[v] != NONE {
            let w = self.fixed[v];
            return if self.inv[w] == NONE { vec![w] } else { vec![] };
        }
        let anchor = self.is.neighbours[v]
            .iter()
            .filter(|&&u| self.map[u] != NONE)
            .min_by_key(|&&u| self.it.neighbours[self.map[u]].len());
        let pool: Vec<usize> = match anchor {
            Some(&u) => self.it.neighbours[self.map[u]].clone(),
            None => (0..self.t.len()).collect(),
        };
        pool.into_iter()
            .filter(|&w| self.inv[w] == NONE)
            .filter(|&w| !self.constrained[v] || self.allowed.as_ref().is_some_and(|a| a[w]))
            .filter(|&w| self.colours.as_ref().map_or(true, |c| c[0][v] == c[1][w]))
            .filter(|&w| self.mode == Mode::Injection || self.is.same_profile(v, self.it, w, self.g, &self.arities))
            .collect()
    }

    fn consistent(&mut self, v: usize) -> bool {
        let w = self.map[v];
        for &(r, i) in &self.is.incident[v] {
            let tup = self.s.relation(r).tuple(i);
            self.buf.clear();
            for &x in tup {
                if self.map[x] == NONE {
                    break;
                }
                self.buf.push(self.map[x]);
            }
            if self.buf.len() == tup.len() && !self.t.has_tuple(self.g.rel(r), &self.buf) {
                return false;
            }
        }
        for &(r, i) in &self.it.incident[w] {
            let tup = self.t.relation(r).tuple(i);
            self.buf.clear();
            for &y in tup {
                if self.inv[y] == NONE {
                    break;
                }
                self.buf.push(self.inv[y]);
            }
            if self.buf.len() == tup.len() && !self.s.has_tuple(self.ginv.rel(r), &self.buf) {
                return false;
            }
        }
        let nf = self.s.language().functions().len();
        for f in 0..nf {
            if !self.function_ok(f, v) {
                return false;
            }
        }
        for k in 0..self.is.preimages[v].len() {
            let (f, u) = self.is.preimages[v][k];
            if !self.function_ok(f, u) {
                return false;
            }
        }
        true
    }

    fn function_ok(&self, f: usize, u: usize) -> bool {
        if self.map[u] == NONE {
            return true;
        }
        let vals = self.s.function(f, u);
        if vals.iter().any(|&x| self.map[x] == NONE) {
            return true;
        }
        let target = self.t.function(self.g.fun(f), self.map[u]);
        if target.len() != vals.len() {
            return false;
        }
        vals.iter().all(|&x| target.binary_search(&self.map[x]).is_ok())
    }

    fn run(&mut self, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(limit("backtracking search nodes", self.cap));
        }
        if k == self.order.len() {
            return Ok(visit(&self.map));
        }
        let v = self.order[k];
        for w in self.candidates(v) {
            self.map[v] = w;
            self.inv[w] = v;
            if self.consistent(v) {
                let saved = self.colours.clone();
                if self.individualize(v, w) && self.run(k + 1, visit)? {
                    return Ok(true);
                }
                self.colours = saved;
            }
            self.map[v] = NONE;
            self.inv[w] = NONE;
        }
        Ok(false)
    }
}

/// Isomorphism `s → t` extending `partial`, with symbols `symbols` or any
/// group element when `None`. Exhaustive: `None` proves nonexistence.
pub fn find_isomorphism(
    s: &Structure,
    t: &Structure,
    symbols: Option<&GroupElement>,
    partial: &BTreeMap<usize, usize>,
    limits: &Limits,
) -> Result<Option<Morphism>> {
    if s.len() != t.len() || s.language() != t.language() {
        return Ok(None);
    }
    let (is, it) = (SearchIndex::new(s), SearchIndex::new(t));
    search_bijection(s, t, &is, &it, symbols, partial, None, limits)
}

#[allow(clippy::too_many_arguments)]
fn search_bijection(
    s: &Structure,
    t: &Structure,
    is: &SearchIndex,
    it: &SearchIndex,
    symbols: Option<&GroupElement>,
    partial: &BTreeMap<usize, usize>,
    constraint: Option<(&[usize], &[usize])>,
    limits: &Limits,
) -> Result<Option<Morphism>> {
    let group: Vec<&GroupElement> = match symbols {
        Some(g) => vec![g],
        None => s.language().group().iter().collect(),
    };
    for g in group {
        let mut search = Search::new(s, t, is, it, g, Mode::Bijection, partial, constraint, limits.max_search_nodes);
        if !search.with_refinement(partial) {
            continue;
        }
        let mut found = None;
        search.run(0, &mut |m| {
            found = Some(m.to_vec());
            true
        })?;
        if let Some(m) = found {
            return Ok(Some(Morphism::total(g.clone(), &m)));
        }
    }
    Ok(None)
}

/// Automorphism of `s` extending the partial automorphism `phi` (same symbols).
pub fn extend_to_automorphism(s: &Structure, phi: &Morphism, limits: &Limits) -> Result<Option<Morphism>> {
    let index = SearchIndex::new(s);
    extend_to_automorphism_indexed(s, &index, phi, limits)
}

/// As [`extend_to_automorphism`] with a prebuilt index.
pub fn extend_to_automorphism_indexed(s: &Structure, index: &SearchIndex, phi: &Morphism, limits: &Limits) -> Result<Option<Morphism>> {
    search_bijection(s, s, index, index, Some(&phi.symbols), &phi.map, None, limits)
}

/// Some automorphism `g` of `s` with `g(xs) ⊆ targets`, trying group elements
/// in order. `None` proves that none exists.
pub fn find_automorphism_with_image(s: &Structure, xs: &[usize], targets: &[usize], limits: &Limits) -> Result<Option<Morphism>> {
    let index = SearchIndex::new(s);
    find_automorphism_with_image_indexed(s, &index, xs, targets, limits)
}

/// As [`find_automorphism_with_image`] with a prebuilt index.
pub fn find_automorphism_with_image_indexed(
    s: &Structure,
    index: &SearchIndex,
    xs: &[usize],
    targets: &[usize],
    limits: &Limits,
) -> Result<Option<Morphism>> {
    search_bijection(s, s, index, index, None, &BTreeMap::new(), Some((xs, targets)), limits)
}

/// Calls `visit` on every embedding `s → t` with symbols `g` extending
/// `partial`, until it returns `true`.
pub fn for_each_embedding(
    s: &Structure,
    t: &Structure,
    g: &GroupElement,
    partial: &BTreeMap<usize, usize>,
    limits: &Limits,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Result<()> {
    let (is, it) = (SearchIndex::new(s), SearchIndex::new(t));
    for_each_embedding_indexed(s, t, &is, &it, g, partial, limits, visit)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn for_each_embedding_indexed(
    s: &Structure,
    t: &Structure,
    is: &SearchIndex,
    it: &SearchIndex,
    g: &GroupElement,
    partial: &BTreeMap<usize, usize>,
    limits: &Limits,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Result<()> {
    if s.len() > t.len() {
        return Ok(());
    }
    let mut search = Search::new(s, t, is, it, g, Mode::Injection, partial, None, limits.max_search_nodes);
    search.run(0, visit)?;
    Ok(())
}

/// Some embedding `s → t`, with identity symbols if `identity_only`.
pub fn find_embedding(s: &Structure, t: &Structure, identity_only: bool, limits: &Limits) -> Result<Option<Morphism>> {
    if s.language() != t.language() {
        return Ok(None);
    }
    let (is, it) = (SearchIndex::new(s), SearchIndex::new(t));
    let id = s.language().identity();
    let group: Vec<&GroupElement> = if identity_only { vec![&id] } else { s.language().group().iter().collect() };
    for g in group {
        let mut found = None;
        for_each_embedding_indexed(s, t, &is, &it, g, &BTreeMap::new(), limits, &mut |m| {
            found = Some(m.to_vec());
            true
        })?;
        if let Some(m) = found {
            return Ok(Some(Morphism::total(g.clone(), &m)));
        }
    }
    Ok(None)
}

/// All closed vertex subsets of `s`, each sorted, in lexicographic order.
pub fn closed_subsets(s: &Structure, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    let n = s.len();
    if n >= 63 || (1u64 << n) > limits.max_enumeration as u64 {
        return Err(limit("closed subset enumeration", limits.max_enumeration as u64));
    }
    let mut out: Vec<Vec<usize>> = (0u64..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|xs| s.is_closed(xs))
        .collect();
    out.sort();
    Ok(out)
}

/// Every partial automorphism `(g, p)` of `s`: group order, then domains
/// lexicographically, then maps lexicographically by image.
pub fn enumerate_partial_automorphisms(s: &Structure, limits: &Limits) -> Result<Vec<Morphism>> {
    let domains = closed_subsets(s, limits)?;
    let it = SearchIndex::new(s);
    let mut out = Vec::new();
    for g in s.language().group() {
        for d in &domains {
            let (sub, old) = s.induced_substructure(d)?;
            let is = SearchIndex::new(&sub);
            let mut images: Vec<Vec<usize>> = Vec::new();
            for_each_embedding_indexed(&sub, s, &is, &it, g, &BTreeMap::new(), limits, &mut |m| {
                if s.is_closed(m) {
                    images.push(m.to_vec());
                }
                false
            })?;
            images.sort();
            for img in images {
                out.push(Morphism::new(g.clone(), old.iter().copied().zip(img).collect()));
                if out.len() > limits.max_enumeration {
                    return Err(limit("partial automorphism enumeration", limits.max_enumeration as u64));
                }
            }
        }
    }
    Ok(out)
}

/// Some homomorphism-embedding `f → b`: a homomorphism that is an embedding on
/// every irreducible substructure of `f`.
pub fn find_homomorphism_embedding(f: &Structure, b: &Structure, limits: &Limits) -> Result<Option<Morphism>> {
    if f.language() != b.language() {
        return Ok(None);
    }
    let irreducibles = enumerate_irreducible_substructures(f, limits)?;
    let (is, ib) = (SearchIndex::new(f), SearchIndex::new(b));
    for g in f.language().group() {
        let mut h = HomSearch::new(f, b, &is, &ib, g, &irreducibles, limits.max_search_nodes);
        if h.run(0)? {
            return Ok(Some(Morphism::total(g.clone(), &h.map)));
        }
    }
    Ok(None)
}

pub fn exists_homomorphism_embedding(f: &Structure, b: &Structure, limits: &Limits) -> Result<bool> {
    Ok(find_homomorphism_embedding(f, b, limits)?.is_some())
}

struct HomSearch<'a> {
    f: &'a Structure,
    b: &'a Structure,
    is: &'a SearchIndex,
    ib: &'a SearchIndex,
    g: &'a GroupElement,
    ginv: GroupElement,
    order: Vec<usize>,
    map: Vec<usize>,
    /// Irreducible sets completed when the vertex at this order position is mapped.
    closing: Vec<Vec<&'a [usize]>>,
    nodes: u64,
    cap: u64,
}

impl<'a> HomSearch<'a> {
    fn new(
        f: &'a Structure,
        b: &'a Structure,
        is: &'a SearchIndex,
        ib: &'a SearchIndex,
        g: &'a GroupElement,
        irreducibles: &'a [Vec<usize>],
        cap: u64,
    ) -> Self {
        let mut order = Vec::new();
        let mut placed = vec![false; f.len()];
        for root in 0..f.len() {
            if placed[root] {
                continue;
            }
            placed[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &is.neighbours[v] {
                    if !placed[w] {
                        placed[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut pos = vec![0; f.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut closing = vec![Vec::new(); f.len()];
        for c in irreducibles {
            if let Some(last) = c.iter().map(|&v| pos[v]).max() {
                closing[last].push(c.as_slice());
            }
        }
        HomSearch { f, b, is, ib, g, ginv: g.inverse(), order, map: vec![NONE; f.len()], closing, nodes: 0, cap }
    }

    fn run(&mut self, k: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(limit("homomorphism-embedding search nodes", self.cap));
        }
        if k == self.order.len() {
            return Ok(true);
        }
        let v = self.order[k];
        let anchor = self.is.neighbours[v].iter().find(|&&u| self.map[u] != NONE);
        let cands: Vec<usize> = match anchor {
            Some(&u) => {
                let mut c = self.ib.neighbours[self.map[u]].clone();
                c.push(self.map[u]);
                c
            }
            None => (0..self.b.len()).collect(),
        };
        for w in cands {
            self.map[v] = w;
            if self.consistent(v, k) && self.run(k + 1)? {
                return Ok(true);
            }
            self.map[v] = NONE;
        }
        Ok(false)
    }

    fn consistent(&self, v: usize, k: usize) -> bool {
        let mut buf = Vec::new();
        for &(r, i) in &self.is.incident[v] {
            let tup = self.f.relation(r).tuple(i);
            if tup.iter().all(|&x| self.map[x] != NONE) {
                buf.clear();
                buf.extend(tup.iter().map(|&x| self.map[x]));
                if !self.b.has_tuple(self.g.rel(r), &buf) {
                    return false;
                }
            }
        }
        let nf = self.f.language().functions().len();
        let mut owners: Vec<(usize, usize)> = (0..nf).map(|fi| (fi, v)).collect();
        owners.extend(self.is.preimages[v].iter().copied());
        for (fi, u) in owners {
            if self.map[u] == NONE || self.f.function(fi, u).iter().any(|&x| self.map[x] == NONE) {
                continue;
            }
            let target = self.b.function(self.g.fun(fi), self.map[u]);
            if self.f.function(fi, u).iter().any(|&x| target.binary_search(&self.map[x]).is_err()) {
                return false;
            }
        }
        self.closing[k].iter().all(|c| self.embeds_on(c))
    }

    fn embeds_on(&self, c: &[usize]) -> bool {
        let mut inv: BTreeMap<usize, usize> = BTreeMap::new();
        for &x in c {
            if inv.insert(self.map[x], x).is_some() {
                return false;
            }
        }
        let mut buf = Vec::new();
        for &y in inv.keys() {
            for &(r, i) in &self.ib.incident[y] {
                let tup = self.b.relation(r).tuple(i);
                buf.clear();
                for z in tup {
                    match inv.get(z) {
                        Some(&x) => buf.push(x),
                        None => break,
                    }
                }
                if buf.len() == tup.len() && !self.f.has_tuple(self.ginv.rel(r), &buf) {
                    return false;
                }
            }
        }
        let nf = self.f.language().functions().len();
        c.iter().all(|&x| (0..nf).all(|fi| self.f.function(fi, x).len() == self.b.function(self.g.fun(fi), self.map[x]).len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::morphism::{check_morphism, MorphismKind};
    use crate::structure::StructureBuilder;
    use std::sync::Arc;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), n);
        for &(x, y) in edges {
            b.add_edge(0, x, y);
        }
        b.build().unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn partial_automorphism_counts() {
        assert_eq!(enumerate_partial_automorphisms(&graph(1, &[]), &lim()).unwrap().len(), 2);
        assert_eq!(enumerate_partial_automorphisms(&graph(2, &[(0, 1)]), &lim()).unwrap().len(), 7);
        assert_eq!(enumerate_partial_automorphisms(&graph(2, &[]), &lim()).unwrap().len(), 7);
    }

    #[test]
    fn middle_of_path_cannot_move_to_an_endpoint() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert!(find_automorphism_with_image(&p3, &[1], &[0], &lim()).unwrap().is_none());
        let id = find_automorphism_with_image(&p3, &[0], &[0, 1], &lim()).unwrap().unwrap();
        assert!(id.map.values().copied().eq(0..3));
    }

    #[test]
    fn four_cycle_rotates_a_vertex_to_its_opposite() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let g = find_automorphism_with_image(&c4, &[0], &[2], &lim()).unwrap().unwrap();
        assert_eq!(g.get(0), Some(2));
        assert_eq!(check_morphism(&g, MorphismKind::Automorphism, &c4, &c4), Ok(()));
    }

    #[test]
    fn homomorphism_embedding_cases() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert!(!exists_homomorphism_embedding(&k3, &c5, &lim()).unwrap());
        assert!(exists_homomorphism_embedding(&k3, &k3, &lim()).unwrap());
        assert!(exists_homomorphism_embedding(&graph(1, &[]), &c5, &lim()).unwrap());
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert!(exists_homomorphism_embedding(&p3, &graph(2, &[(0, 1)]), &lim()).unwrap());
    }

    #[test]
    fn extension_search_respects_the_given_partial_map() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let phi = Morphism::new(c4.language().identity(), [(0, 1), (1, 0)].into_iter().collect());
        let theta = extend_to_automorphism(&c4, &phi, &lim()).unwrap().unwrap();
        assert!(theta.extends(&phi));
        assert_eq!(check_morphism(&theta, MorphismKind::Automorphism, &c4, &c4), Ok(()));
        let bad = Morphism::new(c4.language().identity(), [(0, 0), (1, 2), (2, 1)].into_iter().collect());
        assert!(extend_to_automorphism(&c4, &bad, &lim()).unwrap().is_none());
    }

    #[test]
    fn search_cap_is_reported() {
        let c4 = graph(6, &[]);
        let tiny = Limits { max_search_nodes: 3, ..Limits::default() };
        assert!(find_isomorphism(&c4, &c4, None, &BTreeMap::new(), &tiny).is_err());
    }
}
