//! Coherent EPPA-witness for a finite structure in a finite relational
//! language with a permutation group on its symbols.
//!
//! A vertex is a pair `(x, χ)` where `χ(R)` assigns a bit to every `a(R)`-tuple
//! over `A` containing `x`. A tuple of pairs is in `R_B` iff entries with equal
//! first coordinates are equal pairs and the bits of its distinct pairs on the
//! projected tuple have odd sum.

use std::collections::BTreeMap;

use crate::error::{input, Result};
use crate::limits::Limits;
use crate::morphism::Morphism;
use crate::ordered::order_preserving_extension;
use crate::structure::{Structure, StructureBuilder};
use crate::witness::{check_partial_automorphism_of_copy, check_tuple_budget, check_vertex_budget, Extender, Witness};

const NO_RANK: u32 = u32::MAX;

/// Tuple universes `U^A_a(x)` for every relation, in lexicographic order.
#[derive(Debug, Clone)]
pub struct TupleLayout {
    n: usize,
    arities: Vec<usize>,
    /// Offset of each relation's block inside a valuation.
    offsets: Vec<usize>,
    /// Per relation, per vertex, per tuple code: rank in `U(x)` or `NO_RANK`.
    ranks: Vec<Vec<Vec<u32>>>,
    bits: usize,
}

impl TupleLayout {
    fn new(n: usize, arities: &[usize]) -> Result<Self> {
        let mut offsets = Vec::new();
        let mut ranks = Vec::new();
        let mut bits = 0usize;
        for &a in arities {
            let total = n.checked_pow(a as u32).filter(|&t| t <= 1 << 22).ok_or_else(|| {
                crate::error::Error::Input("tuple universe too large".into())
            })?;
            let mut per_vertex = vec![vec![NO_RANK; total]; n];
            let mut counter = vec![0u32; n];
            for code in 0..total {
                let t = decode(code, n, a);
                for x in 0..n {
                    if t.contains(&x) {
                        per_vertex[x][code] = counter[x];
                        counter[x] += 1;
                    }
                }
            }
            offsets.push(bits);
            bits += counter.first().copied().unwrap_or(0) as usize;
            ranks.push(per_vertex);
        }
        Ok(TupleLayout { n, arities: arities.to_vec(), offsets, ranks, bits })
    }

    /// Number of bits of a valuation.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Bit position of `(R, t)` for vertex `x`, most significant first.
    fn position(&self, r: usize, x: usize, code: usize) -> usize {
        let rank = self.ranks[r][x][code];
        debug_assert!(rank != NO_RANK);
        self.bits - 1 - (self.offsets[r] + rank as usize)
    }

    fn encode(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &v| acc * self.n + v)
    }
}

fn decode(mut code: usize, n: usize, a: usize) -> Vec<usize> {
    let mut t = vec![0; a];
    for i in (0..a).rev() {
        t[i] = code % n;
        code /= n;
    }
    t
}

/// `F_R`: per tuple code, a bitmask over positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipFunction {
    pub arity: usize,
    pub entries: Vec<u32>,
}

impl FlipFunction {
    pub fn entry(&self, code: usize, i: usize) -> bool {
        self.entries[code] >> i & 1 == 1
    }
}

#[derive(Debug, Clone)]
pub struct RelationalExtension {
    pub theta: Morphism,
    pub flips: Vec<FlipFunction>,
    pub phi_hat: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RelationalWitness {
    base: Structure,
    witness: Structure,
    psi: Vec<usize>,
    projection: Vec<usize>,
    codes: Vec<u64>,
    layout: TupleLayout,
}

impl RelationalWitness {
    pub fn build(a: &Structure, limits: &Limits) -> Result<Self> {
        let lang = a.language();
        if !lang.is_relational() {
            return input("relational witness needs a language without functions");
        }
        let n = a.len();
        let arities: Vec<usize> = lang.relations().iter().map(|r| r.arity).collect();
        let layout = TupleLayout::new(n, &arities)?;
        let bits = layout.bits;
        if bits >= 63 {
            return Err(crate::error::limit("valuation bits", 62));
        }
        check_vertex_budget(n as u128 * (1u128 << bits), limits)?;
        let fiber = 1usize << bits;
        let mut names = Vec::with_capacity(n * fiber);
        let mut codes = Vec::with_capacity(n * fiber);
        let mut projection = Vec::with_capacity(n * fiber);
        for x in 0..n {
            for c in 0..fiber as u64 {
                let label: String = (0..bits).rev().map(|i| if c >> i & 1 == 1 { '1' } else { '0' }).collect();
                names.push(format!("{}:{}", a.name(x), label));
                codes.push(c);
                projection.push(x);
            }
        }
        let mut b = StructureBuilder::new(lang.clone(), names);
        let mut count = 0usize;
        for (r, &ar) in arities.iter().enumerate() {
            for code in 0..n.pow(ar as u32) {
                let t = decode(code, n, ar);
                let mut distinct: Vec<usize> = Vec::new();
                for &v in &t {
                    if !distinct.contains(&v) {
                        distinct.push(v);
                    }
                }
                let positions: Vec<usize> = distinct.iter().map(|&x| layout.position(r, x, code)).collect();
                let total = fiber.checked_pow(distinct.len() as u32).unwrap_or(usize::MAX);
                count = count.saturating_add(total / 2);
                check_tuple_budget(count, limits)?;
                let mut choice = vec![0usize; distinct.len()];
                let mut out = vec![0usize; ar];
                for combo in 0..total {
                    let mut rest = combo;
                    let mut parity = 0u64;
                    for i in (0..distinct.len()).rev() {
                        choice[i] = rest % fiber;
                        rest /= fiber;
                        parity ^= (choice[i] as u64) >> positions[i] & 1;
                    }
                    if parity == 1 {
                        for (k, v) in t.iter().enumerate() {
                            let i = distinct.iter().position(|d| d == v).unwrap();
                            out[k] = v * fiber + choice[i];
                        }
                        b.add_tuple(r, &out);
                    }
                }
            }
        }
        let witness = b.build()?;
        let mut w = RelationalWitness { base: a.clone(), witness, psi: Vec::new(), projection, codes, layout };
        w.psi = (0..n).map(|x| x * fiber + w.generic_code(x) as usize).collect();
        Ok(w)
    }

    /// Valuation of `ψ(x)`: bit `(R, ȳ)` is set iff `ȳ ∈ R_A` and `y₁ = x`.
    fn generic_code(&self, x: usize) -> u64 {
        let mut c = 0u64;
        for (r, &ar) in self.layout.arities.iter().enumerate() {
            for t in self.base.relation(r).iter() {
                if t[0] == x {
                    c |= 1 << self.layout.position(r, x, self.layout.encode(t));
                }
                debug_assert!(ar == t.len());
            }
        }
        c
    }

    pub fn layout(&self) -> &TupleLayout {
        &self.layout
    }

    /// Bit `χ(R)(t)` of witness vertex `v`; `t` must contain the owner of `v`.
    pub fn valuation_bit(&self, v: usize, r: usize, t: &[usize]) -> bool {
        let x = self.projection[v];
        self.codes[v] >> self.layout.position(r, x, self.layout.encode(t)) & 1 == 1
    }

    pub fn extend_pa(&self, phi: &Morphism) -> Result<RelationalExtension> {
        check_partial_automorphism_of_copy(self, phi)?;
        let n = self.base.len();
        let fiber = 1usize << self.layout.bits;
        let projected: BTreeMap<usize, usize> =
            phi.map.iter().map(|(&u, &v)| (self.projection[u], self.projection[v])).collect();
        let phi_hat = order_preserving_extension(n, &projected)?;
        let source: BTreeMap<usize, usize> = phi.map.iter().map(|(&u, _)| (self.projection[u], u)).collect();
        let g = &phi.symbols;
        let mut flips = Vec::new();
        for (r, &ar) in self.layout.arities.iter().enumerate() {
            let r2 = g.rel(r);
            let mut entries = vec![0u32; n.pow(ar as u32)];
            for (code, entry) in entries.iter_mut().enumerate() {
                let t = decode(code, n, ar);
                let image: Vec<usize> = t.iter().map(|&v| phi_hat[v]).collect();
                let image_code = self.layout.encode(&image);
                let m = t.iter().position(|v| !source.contains_key(v));
                let mut mask = 0u32;
                for (i, v) in t.iter().enumerate() {
                    if let Some(&u) = source.get(v) {
                        let before = self.codes[u] >> self.layout.position(r, *v, code) & 1;
                        let after = self.codes[phi.map[&u]] >> self.layout.position(r2, phi_hat[*v], image_code) & 1;
                        if before != after {
                            mask |= 1 << i;
                        }
                    }
                }
                if let Some(m) = m {
                    if m < t.len() && mask != 0 {
                        let mut ones: Vec<usize> = t.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
                        ones.sort_unstable();
                        ones.dedup();
                        if ones.len() % 2 == 1 {
                            for (i, v) in t.iter().enumerate() {
                                if *v == t[m] {
                                    mask |= 1 << i;
                                }
                            }
                        }
                    }
                }
                *entry = mask;
            }
            flips.push(FlipFunction { arity: ar, entries });
        }
        let map: Vec<usize> = (0..self.witness.len())
            .map(|v| {
                let x = self.projection[v];
                let mut code = 0u64;
                for (r, &ar) in self.layout.arities.iter().enumerate() {
                    let r2 = g.rel(r);
                    for tc in 0..n.pow(ar as u32) {
                        if self.layout.ranks[r][x][tc] == NO_RANK {
                            continue;
                        }
                        let t = decode(tc, n, ar);
                        let i = t.iter().position(|&y| y == x).unwrap();
                        let bit = self.codes[v] >> self.layout.position(r, x, tc) & 1;
                        let flip = flips[r].entry(tc, i) as u64;
                        let image: Vec<usize> = t.iter().map(|&y| phi_hat[y]).collect();
                        code |= (bit ^ flip) << self.layout.position(r2, phi_hat[x], self.layout.encode(&image));
                    }
                }
                phi_hat[x] * fiber + code as usize
            })
            .collect();
        Ok(RelationalExtension { theta: Morphism::total(g.clone(), &map), flips, phi_hat })
    }
}

/// Whether a flip function has equal entries on equal vertices and an even
/// number of distinct vertices with entry 1, on every tuple.
pub fn flip_parity_holds(f: &FlipFunction, n: usize) -> bool {
    (0..f.entries.len()).all(|code| {
        let t = decode(code, n, f.arity);
        let mut ones = Vec::new();
        for i in 0..t.len() {
            for j in 0..t.len() {
                if t[i] == t[j] && f.entry(code, i) != f.entry(code, j) {
                    return false;
                }
            }
            if f.entry(code, i) && !ones.contains(&t[i]) {
                ones.push(t[i]);
            }
        }
        ones.len() % 2 == 0
    })
}

impl Extender for RelationalWitness {
    fn extend(&self, phi: &Morphism) -> Result<Morphism> {
        Ok(self.extend_pa(phi)?.theta)
    }
}

impl Witness for RelationalWitness {
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
