//! Acceptance gate. Each test prints one `PASS`/`FAIL` line and asserts it.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use eppa::metric::{
    build_metric_witness_over, check_free_amalgamation_membership, detect_non_metric_cycle, metric_structure,
    shortest_path_completion, EdgeLabelledGraph,
};
use eppa::ordered::{compose_permutations, order_preserving_extension};
use eppa::pipeline::{build_pipeline_witness, unwinding_rounds};
use eppa::verify::{audit_witness_size, verify_faithfulness, verify_metric, verify_unwind_property, SizeKind};
use eppa::witness::faithful::FaithfulWitness;
use eppa::witness::functions::FunctionWitness;
use eppa::witness::graph::GraphWitness;
use eppa::witness::relational::{flip_parity_holds, RelationalWitness};
use eppa::witness::unwind::{induced_cycles, UnwoundWitness};
use eppa::witness::{SearchWitness, Witness};
use eppa::{Error, Limits, Structure, StructureBuilder};

/// Witness sizes must match exactly.
const SIZE_TOLERANCE: usize = 0;
const UNWIND_CAP: usize = 6;
const UNWIND_SAMPLES: usize = 10_000;
const UNWIND_SEED: u64 = 0x5eed_0001;
const PIPELINE_SUBSETS: usize = 50;
const PIPELINE_SEED: u64 = 0x5eed_0002;
const METRIC_GRAPHS: usize = 1_000;
const METRIC_SEED: u64 = 0x5eed_0003;
/// Three-vertex function instances whose witness would exceed these caps
/// are counted and skipped.
const FUNCTION_BUDGET: Limits = Limits {
    max_vertices: 1_000,
    max_tuples: 1_000_000,
    max_search_nodes: 50_000_000,
    max_enumeration: 2_000_000,
};

fn line(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn graph_witness_sizes() {
    let expected = [1usize, 4, 12, 32, 80];
    let mut got = Vec::new();
    let mut audits = true;
    for n in 1..=5 {
        // a path, so that the construction sees edges and non-edges
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        let a = graph(n, &edges);
        let w = GraphWitness::build(&a, &limits()).unwrap();
        got.push(w.structure().len());
        audits &= audit_witness_size(SizeKind::Graph, &a, w.structure().len(), None).pass;
    }
    let pass = got.iter().zip(expected).all(|(&g, e)| g.abs_diff(e) <= SIZE_TOLERANCE) && audits;
    line("graph witness sizes", pass, format!("{got:?}, expected {expected:?}"));
}

#[test]
fn graph_eppa_and_coherence() {
    let mut graphs = 0;
    let mut maps = 0;
    let mut triples = 0;
    let mut failures = Vec::new();
    for n in 0..=4 {
        for a in labelled_graphs(n) {
            let w = GraphWitness::build(&a, &limits()).unwrap();
            let (c, s, coh) = check_witness(&a, &w, n <= 3);
            graphs += 1;
            maps += c.stats.checked;
            if !c.pass || !s.pass {
                failures.push(format!("EPPA on {:?}", eppa::format::serialize_structure(&a)));
            }
            if let Some(coh) = coh {
                triples += coh.stats.checked;
                if !coh.pass {
                    failures.push(format!("coherence on {:?}", eppa::format::serialize_structure(&a)));
                }
            }
        }
    }
    line(
        "graph EPPA and coherence",
        failures.is_empty(),
        format!("{graphs} labelled graphs, {maps} partial automorphisms, {triples} triples; failures {failures:?}"),
    );
}

#[test]
fn order_preserving_extension_is_coherent() {
    let n = 5;
    let mut injections = Vec::new();
    for dom in 0..1u32 << n {
        let d: Vec<usize> = (0..n).filter(|&i| dom >> i & 1 == 1).collect();
        for p in permutations(n) {
            // injections of `d`: the first |d| entries of every permutation, deduplicated
            let map: std::collections::BTreeMap<usize, usize> = d.iter().zip(&p).map(|(&x, &y)| (x, y)).collect();
            injections.push(map);
        }
    }
    injections.sort();
    injections.dedup();
    let ext: Vec<Vec<usize>> = injections.iter().map(|p| order_preserving_extension(n, p).unwrap()).collect();
    let mut triples = 0u64;
    let mut bad = None;
    for (fi, f) in injections.iter().enumerate() {
        let range: BTreeSet<usize> = f.values().copied().collect();
        for (gi, g) in injections.iter().enumerate() {
            if g.keys().copied().collect::<BTreeSet<_>>() != range {
                continue;
            }
            triples += 1;
            let h: std::collections::BTreeMap<usize, usize> = f.iter().map(|(&x, y)| (x, g[y])).collect();
            let eh = order_preserving_extension(n, &h).unwrap();
            if eh != compose_permutations(&ext[gi], &ext[fi]) {
                bad = Some((f.clone(), g.clone()));
            }
        }
    }
    line(
        "order-preserving extension coherence",
        bad.is_none() && injections.len() == 1546,
        format!("{} partial injections, {triples} triples, counterexample {bad:?}", injections.len()),
    );
}

#[test]
fn relational_eppa_and_coherence() {
    let mut instances = 0;
    let mut flips = 0;
    let mut failures = Vec::new();
    let mut check = |a: &Structure, failures: &mut Vec<String>| {
        let w = RelationalWitness::build(a, &limits()).unwrap();
        let (c, s, coh) = check_witness(a, &w, true);
        instances += 1;
        if !c.pass || !s.pass || !coh.unwrap().pass {
            failures.push(eppa::format::serialize_structure(a));
        }
        for phi in copy_partial_automorphisms(a, w.embedding()) {
            for f in w.extend_pa(&phi).unwrap().flips {
                flips += 1;
                if !flip_parity_holds(&f, a.len()) {
                    failures.push(format!("flip parity on {}", eppa::format::serialize_structure(a)));
                }
            }
        }
    };
    let lang = binary_unary();
    for n in 0..=3 {
        for code in 0..1u64 << code_bits(&lang, n) {
            let a = from_code(&lang, n, code);
            // three vertices: one structure per isomorphism class
            if n == 3 && !is_canonical(&a) {
                continue;
            }
            check(&a, &mut failures);
        }
    }
    let swapped = swapped_unaries();
    for n in 0..=2 {
        for code in 0..1u64 << code_bits(&swapped, n) {
            check(&from_code(&swapped, n, code), &mut failures);
        }
    }
    line(
        "relational EPPA, coherence and flip parity",
        failures.is_empty(),
        format!("{instances} structures, {flips} flip functions; failures {failures:?}"),
    );
}

/// Structure on `0..n` with relation `R` from `rel` and `F(v) = {w : bit v·n+w of fun}`.
fn with_function(n: usize, rel: u64, fun: u64) -> Structure {
    let base = from_code(&relation_and_function(), n, rel);
    let mut b = StructureBuilder::numbered(relation_and_function(), n);
    for t in base.relation(0).iter() {
        b.add_tuple(0, t);
    }
    for v in 0..n {
        for w in 0..n {
            if fun >> (v * n + w) & 1 == 1 {
                b.add_function_value(0, v, w);
            }
        }
    }
    b.build().unwrap()
}

fn closure_invariant(w: &FunctionWitness) -> bool {
    let b = w.structure();
    let pi = w.projection().unwrap();
    (0..b.len()).all(|y| {
        let v = w.valuation(y);
        b.closure(&[y]).unwrap().into_iter().all(|u| v.vertices.contains(&pi[u]) && *w.valuation(u) == v.closure_of(pi[u]))
    })
}

#[test]
fn unary_function_eppa_and_coherence() {
    let mut instances = 0;
    let mut over_budget = 0;
    let mut largest = 0;
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for n in 0..=3usize {
        let rel_codes: Vec<u64> = if n <= 2 {
            (0..1u64 << (n * n)).collect()
        } else {
            // empty, full and two random relations on three vertices
            vec![0, (1 << 9) - 1, rng.gen_range(0..1 << 9), rng.gen_range(0..1 << 9)]
        };
        for &rel in &rel_codes {
            for fun in 0..1u64 << (n * n) {
                let a = with_function(n, rel, fun);
                if n == 3 && !is_canonical(&a) {
                    continue;
                }
                let w = match FunctionWitness::build(&a, &FUNCTION_BUDGET) {
                    Ok(w) => w,
                    Err(Error::ResourceLimit { .. }) if n == 3 => {
                        over_budget += 1;
                        continue;
                    }
                    Err(e) => panic!("{e}"),
                };
                instances += 1;
                largest = largest.max(w.structure().len());
                let (c, s, coh) = check_witness(&a, &w, true);
                if !c.pass || !s.pass || !coh.unwrap().pass || !closure_invariant(&w) {
                    failures.push(eppa::format::serialize_structure(&a));
                }
            }
        }
    }
    line(
        "unary function EPPA, coherence and closure invariant",
        failures.is_empty(),
        format!(
            "{instances} structures (largest witness {largest}), {over_budget} three-vertex structures over budget; failures {failures:?}"
        ),
    );
}

#[test]
fn faithfulness_over_the_graph_witness() {
    let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
    let mut details = Vec::new();
    let mut pass = true;
    for (name, a) in
        [("P3", graph(3, &[(0, 1), (1, 2)])), ("edgeless pair", graph(2, &[])), ("K2", graph(2, &[(0, 1)]))]
    {
        let b0 = Arc::new(GraphWitness::build(&a, &limits()).unwrap());
        let w = FaithfulWitness::build(b0, &limits()).unwrap();
        let f = verify_faithfulness(&a, w.structure(), w.embedding(), &limits()).unwrap();
        let (c, s, _) = check_witness(&a, &w, false);
        let triangle_free = check_free_amalgamation_membership(&[k3.clone()], w.structure(), &limits()).unwrap();
        pass &= f.pass && c.pass && s.pass && triangle_free;
        details.push(format!(
            "{name}: |B| = {}, faithful {}, EPPA {}, triangle-free {triangle_free}",
            w.structure().len(),
            f.pass,
            c.pass && s.pass
        ));
    }
    line("faithfulness", pass, details.join("; "));
}

#[test]
fn unwinding_trichotomy() {
    let a = graph(2, &[(0, 1)]);
    let b0 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    let base: Arc<dyn Witness> = Arc::new(SearchWitness::new(a.clone(), b0.clone(), vec![0, 1], limits()).unwrap());
    let w = UnwoundWitness::build(base, "E", &limits()).unwrap();
    let b = w.structure();
    let f = w.projection().unwrap();
    let r = verify_unwind_property(b, &b0, f, 0, UNWIND_CAP, UNWIND_SAMPLES, UNWIND_SEED, &limits()).unwrap();
    let onto_c4 = induced_cycles(b, 0, &limits())
        .unwrap()
        .into_iter()
        .filter(|c| {
            let img: BTreeSet<usize> = c.iter().map(|&v| f[v]).collect();
            c.len() == 4 && img.len() == 4
        })
        .count();
    let (c, s, _) = check_witness(&a, &w, false);
    line(
        "unwinding trichotomy",
        r.pass && onto_c4 == 0 && c.pass && s.pass,
        format!(
            "|B| = {}, {} subsets checked {:?}, induced 4-cycles onto the planted C4: {onto_c4}, EPPA {}",
            b.len(),
            r.stats.checked,
            r.stats.outcomes,
            c.pass && s.pass
        ),
    );
}

#[test]
fn pipeline_for_an_edge() {
    let a = graph(2, &[(0, 1)]);
    let b0: Arc<dyn Witness> = Arc::new(SearchWitness::trivial(a.clone(), limits()));
    let w = build_pipeline_witness(b0, 2, &limits()).unwrap();
    w.check_stage_maps().unwrap();
    let (c, s, coh) = check_witness(&a, &w, true);
    let f = verify_faithfulness(&a, w.structure(), w.embedding(), &limits()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(PIPELINE_SEED);
    let n = w.structure().len();
    let mut certified = 0;
    for _ in 0..PIPELINE_SUBSETS {
        let k = rng.gen_range(1..=2.min(n));
        let mut set: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
        set.sort_unstable();
        if let Some(cert) = w.certify_tree_substructure(&set, &limits()).unwrap() {
            if cert.trace.validate().is_ok() {
                certified += 1;
            }
        }
    }
    line(
        "pipeline",
        w.rounds() == unwinding_rounds(2)
            && unwinding_rounds(2) == 2
            && c.pass
            && s.pass
            && coh.unwrap().pass
            && f.pass
            && certified == PIPELINE_SUBSETS,
        format!("{} rounds, |B| = {n}, EPPA {}, faithful {}, {certified}/{PIPELINE_SUBSETS} certificates", w.rounds(), c.pass && s.pass, f.pass),
    );
}

fn labelled(n: usize, edges: &[(usize, usize, u32)]) -> EdgeLabelledGraph {
    EdgeLabelledGraph::from_edges(n, edges).unwrap()
}

#[test]
fn metric_witness_and_completion() {
    let a = labelled(3, &[(0, 1, 1), (0, 2, 2), (1, 2, 2)]);
    let b0 = labelled(4, &[(0, 1, 1), (2, 3, 1), (0, 2, 2), (0, 3, 2), (1, 2, 2), (1, 3, 2)]);
    let w = build_metric_witness_over(&a, 3, &b0, &[0, 1, 2], &limits()).unwrap();
    let sa = metric_structure(&a).unwrap();
    let m = verify_metric(w.structure(), 3);
    let (c, s, _) = check_witness(&sa, &w, false);

    let mut rng = ChaCha8Rng::seed_from_u64(METRIC_SEED);
    let mut agree = 0;
    let mut disagreements = Vec::new();
    for _ in 0..METRIC_GRAPHS {
        let n = rng.gen_range(1..=6);
        let s: Vec<u32> = loop {
            let s: Vec<u32> = (1..=3).filter(|_| rng.gen_bool(0.5)).collect();
            if !s.is_empty() {
                break s;
            }
        };
        let mut g = EdgeLabelledGraph::new(n);
        for x in 0..n {
            for y in x + 1..n {
                if rng.gen_bool(0.6) {
                    g.set(x, y, s[rng.gen_range(0..s.len())]).unwrap();
                }
            }
        }
        let d = shortest_path_completion(&g);
        let preserved = g.edges().all(|(x, y, l)| d.get(x, y) == Some(l));
        let cycle_free = detect_non_metric_cycle(&g).is_none();
        let clique_kept = g.has_unit_clique(3) || !d.has_unit_clique(3);
        if d.is_metric() && preserved == cycle_free && clique_kept {
            agree += 1;
        } else {
            disagreements.push(g);
        }
    }
    line(
        "metric witness and completion",
        m.pass && c.pass && s.pass && w.structure().len() == 12 && agree == METRIC_GRAPHS,
        format!(
            "|B| = {}, metric and K3-free {}, EPPA {}, completion agrees on {agree}/{METRIC_GRAPHS}; first disagreement {:?}",
            w.structure().len(),
            m.pass,
            c.pass && s.pass,
            disagreements.first()
        ),
    );
}

#[test]
fn constructive_extension_agrees_with_search() {
    let mut compared = 0;
    let mut witnesses = 0;
    let mut disagreements = Vec::new();
    let mut run = |a: &Structure, w: &dyn Witness| {
        let (k, d) = extender_agrees_with_search(a, w);
        compared += k;
        witnesses += 1;
        if let Some(phi) = d {
            disagreements.push(format!("{} / {:?}", eppa::format::serialize_structure(a), phi.map));
        }
    };
    for n in 0..=3 {
        for a in labelled_graphs(n) {
            run(&a, &GraphWitness::build(&a, &limits()).unwrap());
        }
    }
    let lang = binary_unary();
    for n in 0..=2 {
        for code in 0..1u64 << code_bits(&lang, n) {
            let a = from_code(&lang, n, code);
            run(&a, &RelationalWitness::build(&a, &limits()).unwrap());
        }
    }
    for n in 0..=2usize {
        for rel in 0..1u64 << (n * n) {
            for fun in 0..1u64 << (n * n) {
                let a = with_function(n, rel, fun);
                run(&a, &FunctionWitness::build(&a, &limits()).unwrap());
            }
        }
    }
    let p3 = graph(3, &[(0, 1), (1, 2)]);
    run(&p3, &FaithfulWitness::build(Arc::new(GraphWitness::build(&p3, &limits()).unwrap()), &limits()).unwrap());
    let k2 = graph(2, &[(0, 1)]);
    let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    let base: Arc<dyn Witness> = Arc::new(SearchWitness::new(k2.clone(), c4, vec![0, 1], limits()).unwrap());
    run(&k2, &UnwoundWitness::build(base, "E", &limits()).unwrap());
    let trivial: Arc<dyn Witness> = Arc::new(SearchWitness::trivial(k2.clone(), limits()));
    run(&k2, &build_pipeline_witness(trivial, 2, &limits()).unwrap());
    let a = labelled(3, &[(0, 1, 1), (0, 2, 2), (1, 2, 2)]);
    let b0 = labelled(4, &[(0, 1, 1), (2, 3, 1), (0, 2, 2), (0, 3, 2), (1, 2, 2), (1, 3, 2)]);
    let mw = build_metric_witness_over(&a, 3, &b0, &[0, 1, 2], &limits()).unwrap();
    run(&metric_structure(&a).unwrap(), &mw);
    line(
        "constructive extension agrees with search",
        disagreements.is_empty(),
        format!("{witnesses} witnesses, {compared} partial automorphisms; disagreements {disagreements:?}"),
    );
}
