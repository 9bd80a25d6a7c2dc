//! Shared machinery of the layers whose vertices are pairs `(x, V)` with `V`
//! a generic set of pairs `(y, χ)` over `Cl_{B₀}(x)`.
//!
//! A valuation function for `y` assigns a digit to every coordinate (bad
//! irreducible or bad cycle sequence) containing `y`. Digits are stored
//! 0-based; a pair is encoded as `(y, code)` with `code` the mixed-radix number
//! of its digits, first coordinate most significant.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{input, limit, Error, Result};
use crate::limits::Limits;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::ordered::order_preserving_extension;
use crate::structure::{Structure, StructureBuilder};
use crate::witness::{check_partial_automorphism_of_copy, check_tuple_budget, check_vertex_budget, Extender, Witness};

/// When two distinct pairs sharing a coordinate are generic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Digits differ.
    Distinct,
    /// Consecutive entries of the sequence have equal digits, the closing
    /// pair `{c₁, c_k}` different digits; any other position pair is never generic.
    Cycle,
}

/// A pair `(vertex of B₀, valuation code)`.
pub type Pair = (usize, u64);

/// Coordinates of the valuation functions.
#[derive(Debug, Clone)]
pub struct Coordinates {
    rule: Rule,
    keys: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    radix: Vec<u32>,
    per_vertex: Vec<Vec<usize>>,
    strides: Vec<Vec<u64>>,
    counts: Vec<u64>,
}

impl Coordinates {
    /// `keys` are sorted vertex sets under [`Rule::Distinct`] and sequences
    /// under [`Rule::Cycle`].
    pub fn new(rule: Rule, vertices: usize, keys: Vec<Vec<usize>>, radix: Vec<u32>) -> Result<Self> {
        if radix.iter().any(|&r| r > 64) {
            return Err(limit("digits per coordinate", 64));
        }
        let mut per_vertex = vec![Vec::new(); vertices];
        for (k, key) in keys.iter().enumerate() {
            for &v in key {
                per_vertex[v].push(k);
            }
        }
        let mut strides = Vec::with_capacity(vertices);
        let mut counts = Vec::with_capacity(vertices);
        for ks in &per_vertex {
            let mut s = vec![0u64; ks.len()];
            let mut acc: u64 = 1;
            for (i, &k) in ks.iter().enumerate().rev() {
                s[i] = acc;
                acc = acc.checked_mul(radix[k] as u64).ok_or_else(|| limit("valuations per vertex", u64::MAX))?;
            }
            strides.push(s);
            counts.push(acc);
        }
        let index = keys.iter().enumerate().map(|(k, key)| (key.clone(), k)).collect();
        Ok(Coordinates { rule, keys, index, radix, per_vertex, strides, counts })
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, k: usize) -> &[usize] {
        &self.keys[k]
    }

    pub fn keys(&self) -> &[Vec<usize>] {
        &self.keys
    }

    pub fn radix(&self, k: usize) -> u32 {
        self.radix[k]
    }

    /// Coordinates containing `x`, ascending.
    pub fn of(&self, x: usize) -> &[usize] {
        &self.per_vertex[x]
    }

    /// Number of valuation functions for `x`.
    pub fn valuation_count(&self, x: usize) -> u64 {
        self.counts[x]
    }

    pub fn digit(&self, p: Pair, k: usize) -> u32 {
        let i = self.per_vertex[p.0].binary_search(&k).expect("coordinate of the vertex");
        (p.1 / self.strides[p.0][i] % self.radix[k] as u64) as u32
    }

    pub fn digits(&self, p: Pair) -> Vec<u32> {
        let ks = &self.per_vertex[p.0];
        (0..ks.len()).map(|i| (p.1 / self.strides[p.0][i] % self.radix[ks[i]] as u64) as u32).collect()
    }

    pub fn encode(&self, x: usize, digits: &[u32]) -> u64 {
        digits.iter().zip(&self.strides[x]).map(|(&d, &s)| d as u64 * s).sum()
    }

    /// Image of coordinate `k` under a vertex permutation of `B₀`.
    pub fn image(&self, k: usize, hat: &[usize]) -> Option<usize> {
        let mut key: Vec<usize> = self.keys[k].iter().map(|&v| hat[v]).collect();
        if self.rule == Rule::Distinct {
            key.sort_unstable();
        }
        self.index.get(&key).copied()
    }

    /// Digits allowed for `y` at coordinate `k` next to the pair `(z, dz)` on it.
    fn allowed(&self, k: usize, y: usize, z: usize, dz: u32) -> u64 {
        let full = if self.radix[k] == 64 { u64::MAX } else { (1u64 << self.radix[k]) - 1 };
        match self.rule {
            Rule::Distinct => full & !(1u64 << dz),
            Rule::Cycle => {
                let key = &self.keys[k];
                let (i, j) = (key.iter().position(|&v| v == y).unwrap(), key.iter().position(|&v| v == z).unwrap());
                if i.abs_diff(j) == 1 {
                    1u64 << dz
                } else if i.min(j) == 0 && i.max(j) == key.len() - 1 {
                    full & !(1u64 << dz)
                } else {
                    0
                }
            }
        }
    }

    /// Whether two pairs are generic.
    pub fn generic_pair(&self, p: Pair, q: Pair) -> bool {
        if p.0 == q.0 {
            return p.1 == q.1;
        }
        self.shared(p.0, q.0).into_iter().all(|k| self.allowed(k, p.0, q.0, self.digit(q, k)) >> self.digit(p, k) & 1 == 1)
    }

    fn shared(&self, x: usize, y: usize) -> Vec<usize> {
        let (a, b) = (&self.per_vertex[x], &self.per_vertex[y]);
        let (mut i, mut j, mut out) = (0, 0, Vec::new());
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Masks of allowed digits per coordinate of `y` given already chosen pairs.
    fn masks(&self, y: usize, chosen: &[Pair]) -> Vec<u64> {
        let ks = &self.per_vertex[y];
        let mut masks: Vec<u64> =
            ks.iter().map(|&k| if self.radix[k] == 64 { u64::MAX } else { (1u64 << self.radix[k]) - 1 }).collect();
        for &q in chosen {
            if q.0 == y {
                continue;
            }
            for k in self.shared(y, q.0) {
                let i = ks.binary_search(&k).unwrap();
                masks[i] &= self.allowed(k, y, q.0, self.digit(q, k));
            }
        }
        masks
    }

    /// Calls `visit` with every code of `y` whose digits lie in `masks`, ascending.
    fn for_each_code(&self, y: usize, masks: &[u64], visit: &mut dyn FnMut(u64) -> Result<()>) -> Result<()> {
        let options: Vec<Vec<u32>> = masks.iter().map(|&m| (0..64).filter(|&d| m >> d & 1 == 1).collect()).collect();
        if options.iter().any(Vec::is_empty) {
            return Ok(());
        }
        let mut idx = vec![0usize; options.len()];
        loop {
            let digits: Vec<u32> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
            visit(self.encode(y, &digits))?;
            let mut pos = options.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < options[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// A layer `B` over `B₀` built from coordinates.
#[derive(Clone)]
pub struct LayeredWitness {
    base: Structure,
    b0: Arc<dyn Witness>,
    coords: Coordinates,
    structure: Structure,
    psi: Vec<usize>,
    projection: Vec<usize>,
    members: Vec<Vec<Pair>>,
    index: HashMap<(usize, Vec<Pair>), usize>,
    fibres: Vec<Vec<usize>>,
    closures: Vec<Vec<usize>>,
    singleton: bool,
}

impl std::fmt::Debug for LayeredWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LayeredWitness")
            .field("coordinates", &self.coords.len())
            .field("vertices", &self.structure.len())
            .finish()
    }
}

impl LayeredWitness {
    /// `psi_digit(k, y)` is the digit of `ψ`'s valuation of `y ∈ ψ₀(A)` at `k`.
    pub fn build(
        b0: Arc<dyn Witness>,
        coords: Coordinates,
        psi_digit: &dyn Fn(usize, usize) -> u32,
        limits: &Limits,
    ) -> Result<Self> {
        let bs = b0.structure();
        let n0 = bs.len();
        let closures: Vec<Vec<usize>> = (0..n0).map(|x| bs.closure(&[x])).collect::<Result<_>>()?;
        let singleton = closures.iter().enumerate().all(|(x, c)| c == &[x]);
        let estimate: u128 = if singleton {
            (0..n0).map(|x| coords.valuation_count(x) as u128).sum()
        } else {
            (0..n0)
                .map(|x| closures[x].iter().map(|&y| coords.valuation_count(y) as u128).fold(1u128, u128::saturating_mul))
                .fold(0u128, u128::saturating_add)
        };
        check_vertex_budget(estimate, limits)?;

        let mut members: Vec<Vec<Pair>> = Vec::new();
        let mut projection = Vec::new();
        let mut fibres = vec![Vec::new(); n0];
        for x in 0..n0 {
            let cl = &closures[x];
            let mut chosen: Vec<Pair> = Vec::with_capacity(cl.len());
            enumerate_generic(&coords, cl, &mut chosen, &mut |set| {
                fibres[x].push(members.len());
                members.push(set.to_vec());
                projection.push(x);
                Ok(())
            })?;
        }
        let index: HashMap<(usize, Vec<Pair>), usize> =
            members.iter().enumerate().map(|(i, m)| ((projection[i], m.clone()), i)).collect();
        let names: Vec<String> = (0..members.len())
            .map(|i| {
                let x = projection[i];
                format!("{}~{}", bs.name(x), i - fibres[x][0])
            })
            .collect();

        let lang = bs.language().clone();
        let mut b = StructureBuilder::new(lang.clone(), names);
        let mut count = 0usize;
        for r in 0..lang.relations().len() {
            for t in bs.relation(r).iter() {
                let mut distinct: Vec<usize> = Vec::new();
                for &v in t {
                    if !distinct.contains(&v) {
                        distinct.push(v);
                    }
                }
                let mut picked: Vec<usize> = Vec::with_capacity(distinct.len());
                let mut pairs: Vec<Pair> = Vec::new();
                let mut emit = |picked: &[usize]| -> Result<()> {
                    let out: Vec<usize> =
                        t.iter().map(|v| picked[distinct.iter().position(|d| d == v).unwrap()]).collect();
                    b.add_tuple(r, &out);
                    count += 1;
                    check_tuple_budget(count, limits)
                };
                if singleton {
                    pick_singleton(&coords, &fibres, &distinct, &mut pairs, &mut picked, &mut emit)?;
                } else {
                    pick_general(&coords, &fibres, &members, &distinct, &mut pairs, &mut picked, &mut emit)?;
                }
            }
        }
        for (i, m) in members.iter().enumerate() {
            let x = projection[i];
            for f in 0..lang.functions().len() {
                for &y in bs.function(f, x) {
                    let sub: Vec<Pair> = m.iter().copied().filter(|p| closures[y].binary_search(&p.0).is_ok()).collect();
                    let target = index
                        .get(&(y, sub))
                        .ok_or_else(|| Error::Precondition("restricted valuation structure missing".into()))?;
                    b.add_function_value(f, i, *target);
                }
            }
        }
        let structure = b.build()?;

        let psi0 = b0.embedding().to_vec();
        let mut psi = Vec::with_capacity(psi0.len());
        for &x in &psi0 {
            let set: Vec<Pair> = closures[x]
                .iter()
                .map(|&y| {
                    let digits: Vec<u32> = coords.of(y).iter().map(|&k| psi_digit(k, y)).collect();
                    (y, coords.encode(y, &digits))
                })
                .collect();
            psi.push(*index.get(&(x, set)).ok_or_else(|| Error::Precondition("copy of A is not generic".into()))?);
        }
        Ok(LayeredWitness {
            base: b0.base().clone(),
            b0,
            coords,
            structure,
            psi,
            projection,
            members,
            index,
            fibres,
            closures,
            singleton,
        })
    }

    pub fn base_witness(&self) -> &Arc<dyn Witness> {
        &self.b0
    }

    pub fn coordinates(&self) -> &Coordinates {
        &self.coords
    }

    /// The valuation structure `V` of vertex `v`, sorted by `B₀` vertex.
    pub fn members(&self, v: usize) -> &[Pair] {
        &self.members[v]
    }

    /// `χ(x, V)` as digits over the coordinates of the owner.
    pub fn owner_digits(&self, v: usize) -> Vec<u32> {
        self.coords.digits(self.owner_pair(v))
    }

    fn owner_pair(&self, v: usize) -> Pair {
        let x = self.projection[v];
        *self.members[v].iter().find(|p| p.0 == x).expect("owner pair")
    }

    pub fn fibre(&self, x: usize) -> &[usize] {
        &self.fibres[x]
    }

    pub fn vertex_of(&self, owner: usize, members: &[Pair]) -> Option<usize> {
        self.index.get(&(owner, members.to_vec())).copied()
    }

    /// Whether the union of the valuation structures of `vs` is generic.
    pub fn is_generic(&self, vs: &[usize]) -> bool {
        let mut all: Vec<Pair> = vs.iter().flat_map(|&v| self.members[v].iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        (0..all.len()).all(|i| (i + 1..all.len()).all(|j| self.coords.generic_pair(all[i], all[j])))
    }

    /// The extension built from an automorphism `hat` of `B₀` extending the
    /// projection of `phi`, where `phi` is a partial automorphism of `B` with
    /// generic domain and range.
    pub fn extend_with(&self, phi: &Morphism, hat: &Morphism) -> Result<Morphism> {
        let bs = self.b0.structure();
        let hat_vec = hat.as_vec(bs.len()).ok_or_else(|| Error::Input("base automorphism is not total".into()))?;
        if hat.symbols != phi.symbols {
            return Err(Error::Precondition("base automorphism permutes symbols differently".into()));
        }
        check_morphism(hat, MorphismKind::Automorphism, bs, bs)
            .map_err(|v| Error::Precondition(format!("base map is not an automorphism: {v}")))?;
        let dom = phi.domain();
        let range = phi.range();
        if !self.is_generic(&dom) || !self.is_generic(&range) {
            return Err(Error::Precondition("domain or range is not generic".into()));
        }
        let images: Vec<usize> = (0..self.coords.len())
            .map(|k| {
                self.coords
                    .image(k, &hat_vec)
                    .ok_or_else(|| Error::Precondition("base automorphism does not preserve the coordinates".into()))
            })
            .collect::<Result<_>>()?;
        let mut taus: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); self.coords.len()];
        for (&u, &v) in &phi.map {
            let (p, q) = (self.owner_pair(u), self.owner_pair(v));
            if hat_vec[p.0] != q.0 {
                return Err(Error::Precondition("base automorphism does not extend the projection".into()));
            }
            for &k in self.coords.of(p.0) {
                let a = self.coords.digit(p, k) as usize;
                let b = self.coords.digit(q, images[k]) as usize;
                if let Some(&old) = taus[k].get(&a) {
                    if old != b {
                        return Err(Error::Precondition("local digit map is not a function".into()));
                    }
                }
                taus[k].insert(a, b);
            }
        }
        let thetas: Vec<Vec<usize>> = taus
            .iter()
            .enumerate()
            .map(|(k, tau)| order_preserving_extension(self.coords.radix(k) as usize, tau))
            .collect::<Result<_>>()?;
        let q_hat = |p: Pair| -> Pair {
            let y2 = hat_vec[p.0];
            let ks2 = self.coords.of(y2);
            let mut digits = vec![0u32; ks2.len()];
            for &k in self.coords.of(p.0) {
                let i = ks2.binary_search(&images[k]).expect("image coordinate contains the image vertex");
                digits[i] = thetas[k][self.coords.digit(p, k) as usize] as u32;
            }
            (y2, self.coords.encode(y2, &digits))
        };
        let map = (0..self.structure.len())
            .map(|v| {
                let mut set: Vec<Pair> = self.members[v].iter().map(|&p| q_hat(p)).collect();
                set.sort_unstable();
                self.vertex_of(hat_vec[self.projection[v]], &set)
                    .ok_or_else(|| Error::Precondition("image valuation structure missing".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Morphism::total(phi.symbols.clone(), &map))
    }

    /// Extension of a partial automorphism of `ψ(A)` through the base extender.
    pub fn extend_pa(&self, phi: &Morphism) -> Result<(Morphism, Morphism)> {
        check_partial_automorphism_of_copy(self, phi)?;
        let projected = Morphism::new(
            phi.symbols.clone(),
            phi.map.iter().map(|(&u, &v)| (self.projection[u], self.projection[v])).collect(),
        );
        let hat = self.b0.extend(&projected)?;
        Ok((self.extend_with(phi, &hat)?, hat))
    }

    /// Whether all closures of `B₀` are singletons (then valuation structures are single pairs).
    pub fn has_singleton_closures(&self) -> bool {
        self.singleton
    }

    pub fn closure_in_base(&self, x: usize) -> &[usize] {
        &self.closures[x]
    }
}

/// Enumerates generic assignments of codes to `cl` (in order), extending `chosen`.
fn enumerate_generic(
    coords: &Coordinates,
    cl: &[usize],
    chosen: &mut Vec<Pair>,
    visit: &mut dyn FnMut(&[Pair]) -> Result<()>,
) -> Result<()> {
    let i = chosen.len();
    if i == cl.len() {
        return visit(chosen);
    }
    let y = cl[i];
    let masks = coords.masks(y, chosen);
    let mut codes = Vec::new();
    coords.for_each_code(y, &masks, &mut |c| {
        codes.push(c);
        Ok(())
    })?;
    for c in codes {
        chosen.push((y, c));
        enumerate_generic(coords, cl, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}

fn pick_singleton(
    coords: &Coordinates,
    fibres: &[Vec<usize>],
    distinct: &[usize],
    pairs: &mut Vec<Pair>,
    picked: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let i = picked.len();
    if i == distinct.len() {
        return emit(picked);
    }
    let y = distinct[i];
    if fibres[y].is_empty() {
        return Ok(());
    }
    let masks = coords.masks(y, pairs);
    let start = fibres[y][0];
    let mut codes = Vec::new();
    coords.for_each_code(y, &masks, &mut |c| {
        codes.push(c);
        Ok(())
    })?;
    for c in codes {
        pairs.push((y, c));
        picked.push(start + c as usize);
        pick_singleton(coords, fibres, distinct, pairs, picked, emit)?;
        picked.pop();
        pairs.pop();
    }
    Ok(())
}

fn pick_general(
    coords: &Coordinates,
    fibres: &[Vec<usize>],
    members: &[Vec<Pair>],
    distinct: &[usize],
    pairs: &mut Vec<Pair>,
    picked: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let i = picked.len();
    if i == distinct.len() {
        return emit(picked);
    }
    for &v in &fibres[distinct[i]] {
        let ok = members[v].iter().all(|&p| pairs.iter().all(|&q| coords.generic_pair(p, q)));
        if ok {
            let before = pairs.len();
            pairs.extend(members[v].iter().copied());
            picked.push(v);
            pick_general(coords, fibres, members, distinct, pairs, picked, emit)?;
            picked.pop();
            pairs.truncate(before);
        }
    }
    Ok(())
}

impl Extender for LayeredWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        Ok(self.extend_pa(phi)?.0)
    }
}

impl Witness for LayeredWitness {
    fn base(&self) -> &Structure {
        &self.base
    }
    fn structure(&self) -> &Structure {
        &self.structure
    }
    fn embedding(&self) -> &[usize] {
        &self.psi
    }
    fn projection(&self) -> Option<&[usize]> {
        Some(&self.projection)
    }
}

/// Rejects base witnesses whose language differs from the layer's.
pub(crate) fn same_language(b0: &dyn Witness) -> Result<()> {
    if b0.base().language() != b0.structure().language() {
        return input("base witness and its copy use different languages");
    }
    Ok(())
}
