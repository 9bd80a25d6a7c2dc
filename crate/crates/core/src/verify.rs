//! Brute-force checks of the properties witnesses claim, producing
//! serializable reports with replayable counterexamples.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irreducible::enumerate_irreducible_substructures;
use crate::language::GroupElement;
use crate::limits::Limits;
use crate::metric::EdgeLabelledGraph;
use crate::morphism::{check_morphism, Morphism, MorphismKind};
use crate::search::{
    enumerate_partial_automorphisms, extend_to_automorphism_indexed, find_automorphism_with_image_indexed,
    find_homomorphism_embedding, SearchIndex,
};
use crate::structure::Structure;
use crate::witness::unwind::induced_graph_cycles;
use crate::witness::Extender;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Eppa,
    Coherence,
    Faithful,
    Unwind,
    Size,
    Metric,
    Forbhe,
}

/// A morphism in plain form: symbol permutations and vertex pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRecord {
    pub relations: Vec<usize>,
    pub functions: Vec<usize>,
    pub map: Vec<(usize, usize)>,
}

impl From<&Morphism> for MapRecord {
    fn from(m: &Morphism) -> Self {
        MapRecord {
            relations: m.symbols.relation_perm().to_vec(),
            functions: m.symbols.function_perm().to_vec(),
            map: m.map.iter().map(|(&x, &y)| (x, y)).collect(),
        }
    }
}

impl MapRecord {
    pub fn to_morphism(&self) -> Result<Morphism> {
        let g = GroupElement::new(self.relations.clone(), self.functions.clone())?;
        let map = crate::morphism::partial_injection(&self.map)?;
        Ok(Morphism::new(g, map))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Counterexample {
    /// A partial automorphism of the copy of `A` (in vertices of `B`).
    PartialAutomorphism { map: MapRecord, reason: String },
    /// `h = g ∘ f` whose extension differs from the composed extensions.
    Triple { f: MapRecord, g: MapRecord, h: MapRecord },
    /// A vertex set of `B`.
    Subset { vertices: Vec<usize>, reason: String },
    Size { vertices: usize, log2_bound: f64 },
    /// An embedding or homomorphism-embedding of a forbidden structure.
    Forbidden { index: usize, map: MapRecord },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Instance {
    pub a_vertices: usize,
    pub b_vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_vertices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    /// Objects examined: maps, triples, subsets or structures.
    pub checked: u64,
    /// Tally of outcomes by label.
    pub outcomes: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limits: Option<Limits>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub check: CheckKind,
    pub instance: Instance,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Counterexample>,
    pub stats: Stats,
}

impl VerifyReport {
    fn new(check: CheckKind, instance: Instance) -> Self {
        VerifyReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            check,
            instance,
            pass: true,
            counterexample: None,
            stats: Stats::default(),
        }
    }

    fn fail(mut self, c: Counterexample) -> Self {
        self.pass = false;
        self.counterexample = Some(c);
        self
    }
}

fn resource(e: &Error) -> bool {
    matches!(e, Error::ResourceLimit { .. })
}

/// Partial automorphisms of `a` carried to `ψ(A)` inside `B`.
fn copy_partial_automorphisms(a: &Structure, psi: &[usize], limits: &Limits) -> Result<Vec<Morphism>> {
    Ok(enumerate_partial_automorphisms(a, limits)?
        .into_iter()
        .map(|p| Morphism::new(p.symbols.clone(), p.map.iter().map(|(&x, &y)| (psi[x], psi[y])).collect()))
        .collect())
}

fn check_embedding(a: &Structure, b: &Structure, psi: &[usize]) -> Option<String> {
    let m = Morphism::total(a.language().identity(), psi);
    check_morphism(&m, MorphismKind::Embedding, a, b).err().map(|v| format!("ψ is not an embedding: {v}"))
}

/// Every partial automorphism of `ψ(A)` extends to an automorphism of `B`,
/// through `extender` when given (its output is checked), otherwise by
/// backtracking search.
pub fn verify_eppa_witness(
    a: &Structure,
    b: &Structure,
    psi: &[usize],
    extender: Option<&dyn Extender>,
    limits: &Limits,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new(CheckKind::Eppa, Instance { a_vertices: a.len(), b_vertices: b.len(), base_vertices: None });
    report.stats.limits = Some(*limits);
    if let Some(reason) = check_embedding(a, b, psi) {
        return Ok(report.fail(Counterexample::Subset { vertices: psi.to_vec(), reason }));
    }
    let pas = copy_partial_automorphisms(a, psi, limits)?;
    let index = SearchIndex::new(b);
    let outcomes: Vec<Result<Option<String>>> = pas
        .par_iter()
        .map(|phi| match extender {
            Some(ext) => match ext.extend(phi) {
                Ok(theta) => {
                    if let Err(v) = check_morphism(&theta, MorphismKind::Automorphism, b, b) {
                        Ok(Some(format!("extension is not an automorphism: {v}")))
                    } else if !theta.extends(phi) {
                        Ok(Some("extension does not extend the map".into()))
                    } else {
                        Ok(None)
                    }
                }
                Err(e) if resource(&e) => Err(e),
                Err(e) => Ok(Some(e.to_string())),
            },
            None => Ok(match extend_to_automorphism_indexed(b, &index, phi, limits)? {
                Some(_) => None,
                None => Some("no automorphism extends the map".into()),
            }),
        })
        .collect();
    report.stats.checked = pas.len() as u64;
    for (phi, o) in pas.iter().zip(outcomes) {
        if let Some(reason) = o? {
            return Ok(report.fail(Counterexample::PartialAutomorphism { map: phi.into(), reason }));
        }
    }
    Ok(report)
}

/// For all partial automorphisms `f, g` of `ψ(A)` with `range f = dom g`,
/// the extension of `g ∘ f` is the extension of `g` composed with that of `f`.
pub fn verify_coherence(
    a: &Structure,
    b: &Structure,
    psi: &[usize],
    extender: &dyn Extender,
    limits: &Limits,
) -> Result<VerifyReport> {
    let mut report =
        VerifyReport::new(CheckKind::Coherence, Instance { a_vertices: a.len(), b_vertices: b.len(), base_vertices: None });
    report.stats.limits = Some(*limits);
    if let Some(reason) = check_embedding(a, b, psi) {
        return Ok(report.fail(Counterexample::Subset { vertices: psi.to_vec(), reason }));
    }
    let pas = copy_partial_automorphisms(a, psi, limits)?;
    let exts: Vec<Result<Morphism>> = pas.par_iter().map(|phi| extender.extend(phi)).collect();
    let mut ext = Vec::with_capacity(pas.len());
    for (phi, e) in pas.iter().zip(exts) {
        match e {
            Ok(t) => ext.push(t),
            Err(e) if resource(&e) => return Err(e),
            Err(e) => {
                return Ok(report.fail(Counterexample::PartialAutomorphism { map: phi.into(), reason: e.to_string() }))
            }
        }
    }
    let position: HashMap<&Morphism, usize> = pas.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut by_domain: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (i, p) in pas.iter().enumerate() {
        by_domain.entry(p.domain()).or_default().push(i);
    }
    let failures: Vec<(u64, Option<(usize, usize, usize)>)> = (0..pas.len())
        .into_par_iter()
        .map(|fi| {
            let f = &pas[fi];
            let mut checked = 0;
            for &gi in by_domain.get(&f.range()).map(Vec::as_slice).unwrap_or(&[]) {
                checked += 1;
                let h = pas[gi].compose(f);
                let hi = position[&h];
                if ext[hi] != ext[gi].compose(&ext[fi]) {
                    return (checked, Some((fi, gi, hi)));
                }
            }
            (checked, None)
        })
        .collect();
    report.stats.checked = failures.iter().map(|x| x.0).sum();
    if let Some((fi, gi, hi)) = failures.into_iter().find_map(|x| x.1) {
        return Ok(report.fail(Counterexample::Triple { f: (&pas[fi]).into(), g: (&pas[gi]).into(), h: (&pas[hi]).into() }));
    }
    Ok(report)
}

/// Every irreducible substructure of `B` is sent into `ψ(A)` by some
/// automorphism of `B`.
pub fn verify_faithfulness(a: &Structure, b: &Structure, psi: &[usize], limits: &Limits) -> Result<VerifyReport> {
    let mut report =
        VerifyReport::new(CheckKind::Faithful, Instance { a_vertices: a.len(), b_vertices: b.len(), base_vertices: None });
    report.stats.limits = Some(*limits);
    if let Some(reason) = check_embedding(a, b, psi) {
        return Ok(report.fail(Counterexample::Subset { vertices: psi.to_vec(), reason }));
    }
    let mut targets = psi.to_vec();
    targets.sort_unstable();
    let irreducibles = enumerate_irreducible_substructures(b, limits)?;
    let index = SearchIndex::new(b);
    let verdicts: Vec<Result<bool>> = irreducibles
        .par_iter()
        .map(|c| {
            if c.iter().all(|v| targets.binary_search(v).is_ok()) {
                return Ok(true);
            }
            Ok(find_automorphism_with_image_indexed(b, &index, c, &targets, limits)?.is_some())
        })
        .collect();
    report.stats.checked = irreducibles.len() as u64;
    for (c, v) in irreducibles.iter().zip(verdicts) {
        if !v? {
            return Ok(report.fail(Counterexample::Subset {
                vertices: c.clone(),
                reason: "no automorphism sends this irreducible substructure into the copy of A".into(),
            }));
        }
    }
    Ok(report)
}

/// Which alternative of the cycle trichotomy a subset satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trichotomy {
    /// No induced `E`-cycle of length at least four.
    Acyclic,
    /// The map is not injective on the subset.
    Collapses,
    /// The image spans strictly more `E`-pairs.
    GainsEdges,
    Violated,
}

impl Trichotomy {
    fn label(self) -> &'static str {
        match self {
            Trichotomy::Acyclic => "acyclic",
            Trichotomy::Collapses => "collapses",
            Trichotomy::GainsEdges => "gains-edges",
            Trichotomy::Violated => "violated",
        }
    }
}

struct UnwindCtx<'a> {
    b0: &'a Structure,
    f: &'a [usize],
    e: usize,
    adj: Vec<Vec<usize>>,
}

impl UnwindCtx<'_> {
    fn classify(&self, c: &[usize], limits: &Limits) -> Result<Trichotomy> {
        let mut local: HashMap<usize, usize> = HashMap::with_capacity(c.len());
        for (i, &v) in c.iter().enumerate() {
            local.insert(v, i);
        }
        let sub: Vec<Vec<usize>> =
            c.iter().map(|v| self.adj[*v].iter().filter_map(|w| local.get(w).copied()).collect()).collect();
        if c.len() < 4 || induced_graph_cycles(&sub, limits)?.is_empty() {
            return Ok(Trichotomy::Acyclic);
        }
        let mut image: Vec<usize> = c.iter().map(|&v| self.f[v]).collect();
        image.sort_unstable();
        image.dedup();
        if image.len() < c.len() {
            return Ok(Trichotomy::Collapses);
        }
        let edges_c: usize = sub.iter().map(Vec::len).sum();
        let mut edges_f = 0;
        for &x in &image {
            for &y in &image {
                if x != y && self.b0.has_tuple(self.e, &[x, y]) {
                    edges_f += 1;
                }
            }
        }
        Ok(if edges_f > edges_c { Trichotomy::GainsEdges } else { Trichotomy::Violated })
    }
}

/// Connected vertex sets of size at most `cap`, each exactly once.
fn connected_subsets(adj: &[Vec<usize>], cap: usize, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    fn extend(
        adj: &[Vec<usize>],
        root: usize,
        sub: &mut Vec<usize>,
        ext: Vec<usize>,
        cap: usize,
        out: &mut Vec<Vec<usize>>,
        limits: &Limits,
    ) -> Result<()> {
        let mut c = sub.clone();
        c.sort_unstable();
        out.push(c);
        if out.len() > limits.max_enumeration {
            return Err(crate::error::limit("connected subsets", limits.max_enumeration as u64));
        }
        if sub.len() >= cap {
            return Ok(());
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &adj[w] {
                if u > root
                    && !sub.contains(&u)
                    && !next.contains(&u)
                    && u != w
                    && !sub.iter().any(|&s| adj[s].contains(&u))
                {
                    next.push(u);
                }
            }
            sub.push(w);
            extend(adj, root, sub, next, cap, out, limits)?;
            sub.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    if cap == 0 {
        return Ok(out);
    }
    for v in 0..adj.len() {
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        extend(adj, v, &mut vec![v], ext, cap, &mut out, limits)?;
    }
    Ok(out)
}

/// Largest structure checked on all subsets.
pub const EXHAUSTIVE_UNWIND_LIMIT: usize = 12;

/// The cycle trichotomy for `f: B → B₀` over the binary relation `e`: every
/// subset `C` of `B` has no induced `E`-cycle of length at least four, or
/// `|f(C)| < |C|`, or `f(C)` spans more `E`-pairs than `C`.
///
/// Every subset is checked when `|B| ≤ 12`; otherwise all connected subsets
/// of size at most `cap` and `samples` random connected subsets of size
/// between `cap + 1` and `2·cap`, drawn with `seed`.
#[allow(clippy::too_many_arguments)]
pub fn verify_unwind_property(
    b: &Structure,
    b0: &Structure,
    f: &[usize],
    e: usize,
    cap: usize,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new(
        CheckKind::Unwind,
        Instance { a_vertices: 0, b_vertices: b.len(), base_vertices: Some(b0.len()) },
    );
    report.stats.seed = Some(seed);
    report.stats.cap = Some(cap);
    report.stats.limits = Some(*limits);
    if f.len() != b.len() || f.iter().any(|&v| v >= b0.len()) || b.language() != b0.language() {
        return Err(Error::Input("map is not a total map between structures of one language".into()));
    }
    let hom = Morphism::total(b.language().identity(), f);
    if let Err(v) = check_morphism(&hom, MorphismKind::Homomorphism, b, b0) {
        return Ok(report.fail(Counterexample::Subset { vertices: vec![], reason: format!("not a homomorphism: {v}") }));
    }
    let ctx = UnwindCtx { b0, f, e, adj: b.binary_neighbours(e) };
    let n = b.len();
    let subsets: Vec<Vec<usize>> = if n <= EXHAUSTIVE_UNWIND_LIMIT {
        (0u32..1 << n).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
    } else {
        let mut all = connected_subsets(&ctx.adj, cap, limits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            if let Some(c) = random_connected(&ctx.adj, cap + 1, 2 * cap.max(1), &mut rng) {
                all.push(c);
            }
        }
        all
    };
    let verdicts: Vec<Result<Trichotomy>> = subsets.par_iter().map(|c| ctx.classify(c, limits)).collect();
    report.stats.checked = subsets.len() as u64;
    let mut first_bad = None;
    for (c, v) in subsets.iter().zip(verdicts) {
        let v = v?;
        *report.stats.outcomes.entry(v.label().to_string()).or_default() += 1;
        if v == Trichotomy::Violated && first_bad.is_none() {
            first_bad = Some(c.clone());
        }
    }
    if let Some(c) = first_bad {
        return Ok(report.fail(Counterexample::Subset {
            vertices: c,
            reason: "induced cycle kept injectively without gaining edges".into(),
        }));
    }
    Ok(report)
}

/// A connected set grown from a random vertex by random frontier picks, with
/// a size drawn from `lo..=hi`; `None` if the component is too small.
fn random_connected(adj: &[Vec<usize>], lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    if adj.is_empty() {
        return None;
    }
    let target = rng.gen_range(lo..=hi.max(lo));
    let start = rng.gen_range(0..adj.len());
    let mut set = vec![start];
    let mut frontier: Vec<usize> = adj[start].clone();
    while set.len() < target {
        frontier.retain(|v| !set.contains(v));
        frontier.sort_unstable();
        frontier.dedup();
        let &v = frontier.choose(rng)?;
        set.push(v);
        frontier.extend(adj[v].iter().copied());
    }
    set.sort_unstable();
    Some(set)
}

/// Construction whose size is audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeKind {
    Graph,
    Relational,
    Functions,
    Faithful,
    Unwind,
    Pipeline { rounds: usize },
}

/// Exact size or upper bound, as `log2`, of the construction `kind` for `a`
/// over a base witness on `base` vertices. The boolean tells whether the
/// value is exact.
pub fn size_bound_log2(kind: SizeKind, a: &Structure, base: Option<usize>) -> (f64, bool) {
    let n = a.len() as f64;
    let m = base.unwrap_or(a.len()) as f64;
    let lg = |x: f64| if x <= 1.0 { 0.0 } else { x.log2() };
    match kind {
        SizeKind::Graph => {
            if a.is_empty() {
                (f64::NEG_INFINITY, true)
            } else {
                (lg(n) + n - 1.0, true)
            }
        }
        SizeKind::Relational => {
            if a.is_empty() {
                return (f64::NEG_INFINITY, true);
            }
            let lang = a.language();
            let bits: f64 = (0..lang.relations().len())
                .map(|r| {
                    let k = lang.arity(r) as i32;
                    n.powi(k) - (n - 1.0).powi(k)
                })
                .sum();
            (lg(n) + bits, true)
        }
        SizeKind::Functions => {
            let o = a.relabelling_orbit().len() as f64;
            (lg(m) + m + lg(o) + n * lg(n), false)
        }
        SizeKind::Faithful => (faithful_bound(m), false),
        SizeKind::Unwind => (unwind_bound(m), false),
        SizeKind::Pipeline { rounds } => {
            let mut b = faithful_bound(m);
            for _ in 0..rounds {
                b = unwind_bound(b.exp2());
            }
            (b, false)
        }
    }
}

fn faithful_bound(m: f64) -> f64 {
    // pairs P ≤ m (m − 1)^(2^m); vertices ≤ m · 2^|P| · m^m
    let lg = |x: f64| if x <= 1.0 { 0.0 } else { x.log2() };
    let p = m * (m - 1.0).max(1.0).powf(m.exp2());
    lg(m) + p + m * lg(m)
}

fn unwind_bound(m: f64) -> f64 {
    // vertices ≤ m · 2^(m · 2^((m + 1)^m))
    let lg = |x: f64| if x <= 1.0 { 0.0 } else { x.log2() };
    lg(m) + m * (m + 1.0).powf(m).exp2()
}

/// `|B|` against the exact size or upper bound of the construction.
pub fn audit_witness_size(kind: SizeKind, a: &Structure, b_vertices: usize, base: Option<usize>) -> VerifyReport {
    let mut report =
        VerifyReport::new(CheckKind::Size, Instance { a_vertices: a.len(), b_vertices, base_vertices: base });
    let (bound, exact) = size_bound_log2(kind, a, base);
    report.stats.checked = 1;
    let actual = if b_vertices == 0 { f64::NEG_INFINITY } else { (b_vertices as f64).log2() };
    let ok = if exact { bound.exp2().round() as u128 == b_vertices as u128 || (bound.is_infinite() && b_vertices == 0) } else { actual <= bound + 1e-9 };
    report.stats.outcomes.insert(if exact { "exact".into() } else { "bound".into() }, 1);
    if !ok {
        return report.fail(Counterexample::Size { vertices: b_vertices, log2_bound: bound });
    }
    report
}

/// `B` is a metric space over `d1, …, dm` without `n` points pairwise at
/// distance 1.
pub fn verify_metric(b: &Structure, n: usize) -> VerifyReport {
    let mut report = VerifyReport::new(CheckKind::Metric, Instance { a_vertices: 0, b_vertices: b.len(), base_vertices: None });
    let g = match EdgeLabelledGraph::from_structure(b) {
        Ok(g) => g,
        Err(e) => return report.fail(Counterexample::Subset { vertices: vec![], reason: e.to_string() }),
    };
    report.stats.checked = (b.len() as u64).pow(3);
    if let Some(t) = violated_triangle(&g) {
        return report.fail(Counterexample::Subset { vertices: t, reason: "not a metric space".into() });
    }
    if n >= 1 && g.has_unit_clique(n) {
        return report
            .fail(Counterexample::Subset { vertices: vec![], reason: format!("{n} points pairwise at distance 1") });
    }
    report
}

fn violated_triangle(g: &EdgeLabelledGraph) -> Option<Vec<usize>> {
    let n = g.len();
    for x in 0..n {
        for y in x + 1..n {
            let Some(d) = g.get(x, y) else { return Some(vec![x, y]) };
            for z in 0..n {
                if z != x && z != y && d > g.get(x, z).unwrap_or(u32::MAX / 2) + g.get(z, y).unwrap_or(u32::MAX / 2) {
                    return Some(vec![x, y, z]);
                }
            }
        }
    }
    None
}

/// `B` admits no homomorphism-embedding from any structure of `forbidden`.
pub fn verify_forb_he(forbidden: &[Structure], b: &Structure, limits: &Limits) -> Result<VerifyReport> {
    let mut report = VerifyReport::new(CheckKind::Forbhe, Instance { a_vertices: 0, b_vertices: b.len(), base_vertices: None });
    for (i, f) in forbidden.iter().enumerate() {
        report.stats.checked += 1;
        if let Some(m) = find_homomorphism_embedding(f, b, limits)? {
            return Ok(report.fail(Counterexample::Forbidden { index: i, map: (&m).into() }));
        }
    }
    Ok(report)
}
