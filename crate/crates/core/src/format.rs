//! Text formats for structures and morphisms.
//!
//! ```text
//! # a directed edge and a function
//! language: E/2, F!1
//! group: ()
//! vertices: 1 2
//! rel E: (1,2)
//! fun F: 1 -> {2}
//! ```
//!
//! The group lists every element in cycle notation on symbol names,
//! separated by commas; it defaults to the trivial group. Morphisms are
//! written as an optional `perm:` line followed by `map: u -> v` lines.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::language::{GroupElement, Language, RelationSymbol};
use crate::morphism::Morphism;
use crate::structure::{Structure, StructureBuilder};

fn err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

/// Lines with comments removed, paired with 1-based line numbers. A `#`
/// starts a comment at the beginning of a line or after whitespace.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let mut cut = l.len();
        let bytes = l.as_bytes();
        for (j, &c) in bytes.iter().enumerate() {
            if c == b'#' && (j == 0 || bytes[j - 1].is_ascii_whitespace()) {
                cut = j;
                break;
            }
        }
        let l = l[..cut].trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn split_header(line: usize, l: &str) -> Result<(&str, &str)> {
    match l.split_once(':') {
        Some((k, v)) => Ok((k.trim(), v.trim())),
        None => err(line, format!("expected `key: value`, found `{l}`")),
    }
}

/// Symbol permutation written as disjoint cycles, `()` for the identity.
fn parse_permutation(line: usize, text: &str, rels: &[RelationSymbol], funs: &[String]) -> Result<GroupElement> {
    let mut rel: Vec<usize> = (0..rels.len()).collect();
    let mut fun: Vec<usize> = (0..funs.len()).collect();
    let text = text.trim();
    let mut rest = text;
    let mut seen = std::collections::HashSet::new();
    while !rest.is_empty() {
        let Some(open) = rest.strip_prefix('(') else {
            return err(line, format!("expected `(` in permutation `{text}`"));
        };
        let Some(close) = open.find(')') else {
            return err(line, format!("unclosed cycle in `{text}`"));
        };
        let names: Vec<&str> = open[..close].split_whitespace().collect();
        rest = open[close + 1..].trim_start();
        for n in &names {
            if !seen.insert(n.to_string()) {
                return err(line, format!("symbol {n} occurs twice in `{text}`"));
            }
        }
        let relation_idx: Vec<Option<usize>> = names.iter().map(|n| rels.iter().position(|r| r.name == *n)).collect();
        let function_idx: Vec<Option<usize>> = names.iter().map(|n| funs.iter().position(|f| f == n)).collect();
        if relation_idx.iter().all(Option::is_some) {
            let idx: Vec<usize> = relation_idx.into_iter().map(Option::unwrap).collect();
            for k in 0..idx.len() {
                rel[idx[k]] = idx[(k + 1) % idx.len()];
            }
        } else if function_idx.iter().all(Option::is_some) {
            let idx: Vec<usize> = function_idx.into_iter().map(Option::unwrap).collect();
            for k in 0..idx.len() {
                fun[idx[k]] = idx[(k + 1) % idx.len()];
            }
        } else {
            return err(line, format!("cycle ({}) mixes kinds or names unknown symbols", names.join(" ")));
        }
    }
    GroupElement::new(rel, fun).or_else(|e| err(line, e.to_string()))
}

fn permutation_text(g: &GroupElement, lang: &Language) -> String {
    let mut out = String::new();
    let mut cycles = |perm: &[usize], name: &dyn Fn(usize) -> String| {
        let mut done = vec![false; perm.len()];
        for s in 0..perm.len() {
            if done[s] || perm[s] == s {
                continue;
            }
            let mut c = Vec::new();
            let mut x = s;
            while !done[x] {
                done[x] = true;
                c.push(name(x));
                x = perm[x];
            }
            let _ = write!(out, "({})", c.join(" "));
        }
    };
    cycles(g.relation_perm(), &|r| lang.relations()[r].name.clone());
    cycles(g.function_perm(), &|f| lang.functions()[f].clone());
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

/// Parses a structure document.
pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut lang_line = None;
    let mut group_line = None;
    let mut vertices_line = None;
    let mut rel_lines = Vec::new();
    let mut fun_lines = Vec::new();
    for (no, l) in lines(text) {
        let (key, value) = split_header(no, l)?;
        match key.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["language"] if lang_line.is_none() => lang_line = Some((no, value)),
            ["group"] if group_line.is_none() => group_line = Some((no, value)),
            ["vertices"] if vertices_line.is_none() => vertices_line = Some((no, value)),
            ["rel", name] => rel_lines.push((no, name.to_string(), value)),
            ["fun", name] => fun_lines.push((no, name.to_string(), value)),
            _ => return err(no, format!("unexpected or repeated header `{key}`")),
        }
    }
    let Some((lno, ltext)) = lang_line else { return err(1, "missing `language:` line") };
    let mut rels = Vec::new();
    let mut funs = Vec::new();
    for item in ltext.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((name, arity)) = item.split_once('/') {
            let arity: usize = arity.trim().parse().or_else(|_| err(lno, format!("bad arity in `{item}`")))?;
            rels.push(RelationSymbol { name: name.trim().to_string(), arity });
        } else if let Some(name) = item.strip_suffix("!1") {
            funs.push(name.trim().to_string());
        } else {
            return err(lno, format!("expected `name/arity` or `name!1`, found `{item}`"));
        }
    }
    let group = match group_line {
        None => vec![],
        Some((gno, gtext)) => gtext
            .split(',')
            .map(|p| parse_permutation(gno, p, &rels, &funs))
            .collect::<Result<Vec<_>>>()?,
    };
    let gno = group_line.map_or(lno, |g| g.0);
    let language = Arc::new(Language::new(rels, funs, group).or_else(|e| err(gno, e.to_string()))?);
    let Some((vno, vtext)) = vertices_line else { return err(lno, "missing `vertices:` line") };
    let names: Vec<String> = vtext.split_whitespace().map(str::to_string).collect();
    let mut index = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return err(vno, format!("vertex {n} listed twice"));
        }
    }
    let vertex = |no: usize, name: &str| -> Result<usize> {
        index.get(name.trim()).copied().ok_or_else(|| Error::Parse { line: no, message: format!("unknown vertex `{}`", name.trim()) })
    };
    let mut b = StructureBuilder::new(language.clone(), names.clone());
    for (no, name, value) in rel_lines {
        let Some(r) = language.relation_index(&name) else { return err(no, format!("unknown relation {name}")) };
        let mut rest = value;
        while !rest.is_empty() {
            let Some(open) = rest.strip_prefix('(') else { return err(no, format!("expected `(` in `{value}`")) };
            let Some(close) = open.find(')') else { return err(no, "unclosed tuple") };
            let t: Vec<usize> = open[..close].split(',').map(|v| vertex(no, v)).collect::<Result<_>>()?;
            if t.len() != language.arity(r) {
                return err(no, format!("tuple of {name} has {} entries, arity is {}", t.len(), language.arity(r)));
            }
            b.add_tuple(r, &t);
            rest = open[close + 1..].trim_start();
        }
    }
    for (no, name, value) in fun_lines {
        let Some(f) = language.function_index(&name) else { return err(no, format!("unknown function {name}")) };
        let mut rest = value.trim();
        while !rest.is_empty() {
            let Some((v, after)) = rest.split_once("->") else { return err(no, format!("expected `v -> {{…}}` in `{rest}`")) };
            let v = vertex(no, v)?;
            let after = after.trim_start();
            let Some(open) = after.strip_prefix('{') else { return err(no, "expected `{`") };
            let Some(close) = open.find('}') else { return err(no, "unclosed set") };
            for w in open[..close].split(',').map(str::trim).filter(|s| !s.is_empty()) {
                b.add_function_value(f, v, vertex(no, w)?);
            }
            rest = open[close + 1..].trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
    }
    b.build().map_err(|e| Error::Parse { line: vno, message: e.to_string() })
}

/// Canonical text of a structure: symbols as declared, tuples in
/// lexicographic order of vertex positions, value sets ascending.
pub fn serialize_structure(s: &Structure) -> String {
    let lang = s.language();
    let mut out = String::new();
    let symbols: Vec<String> = lang
        .relations()
        .iter()
        .map(|r| format!("{}/{}", r.name, r.arity))
        .chain(lang.functions().iter().map(|f| format!("{f}!1")))
        .collect();
    let _ = writeln!(out, "language: {}", symbols.join(", "));
    if lang.group().len() > 1 {
        let g: Vec<String> = lang.group().iter().map(|g| permutation_text(g, lang)).collect();
        let _ = writeln!(out, "group: {}", g.join(", "));
    }
    let _ = writeln!(out, "vertices: {}", s.names().join(" "));
    for (r, sym) in lang.relations().iter().enumerate() {
        let mut tuples: Vec<&[usize]> = s.relation(r).iter().collect();
        tuples.sort();
        let text: Vec<String> = tuples
            .iter()
            .map(|t| format!("({})", t.iter().map(|&v| s.name(v)).collect::<Vec<_>>().join(",")))
            .collect();
        let _ = writeln!(out, "rel {}: {}", sym.name, text.join(" "));
    }
    for (f, name) in lang.functions().iter().enumerate() {
        let entries: Vec<String> = (0..s.len())
            .filter(|&v| !s.function(f, v).is_empty())
            .map(|v| {
                let mut vals: Vec<usize> = s.function(f, v).to_vec();
                vals.sort_unstable();
                let vals: Vec<&str> = vals.iter().map(|&w| s.name(w)).collect();
                format!("{} -> {{{}}}", s.name(v), vals.join(","))
            })
            .collect();
        let _ = writeln!(out, "fun {name}: {}", entries.join(", "));
    }
    // trailing spaces after empty relation lists are dropped
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

/// Parses a morphism document with vertex names of `source` and `target`.
pub fn parse_morphism(text: &str, source: &Structure, target: &Structure) -> Result<Morphism> {
    let lang = source.language();
    let mut symbols = None;
    let mut map = BTreeMap::new();
    let mut images = HashMap::new();
    let (si, ti) = (source.name_index(), target.name_index());
    for (no, l) in lines(text) {
        let (key, value) = split_header(no, l)?;
        match key {
            "perm" if symbols.is_none() => {
                symbols = Some(parse_permutation(no, value, lang.relations(), lang.functions())?);
            }
            "map" => {
                let Some((u, v)) = value.split_once("->") else { return err(no, "expected `u -> v`") };
                let Some(&u) = si.get(u.trim()) else { return err(no, format!("unknown source vertex `{}`", u.trim())) };
                let Some(&v) = ti.get(v.trim()) else { return err(no, format!("unknown target vertex `{}`", v.trim())) };
                if map.insert(u, v).is_some() {
                    return err(no, format!("vertex {} mapped twice", source.name(u)));
                }
                if let Some(prev) = images.insert(v, u) {
                    return err(no, format!("map is not injective: {} and {} share an image", source.name(prev), source.name(u)));
                }
            }
            _ => return err(no, format!("unexpected header `{key}`")),
        }
    }
    Ok(Morphism::new(symbols.unwrap_or_else(|| lang.identity()), map))
}

/// Text of a morphism between `source` and `target`.
pub fn serialize_morphism(m: &Morphism, source: &Structure, target: &Structure) -> String {
    let mut out = String::new();
    if !m.symbols.is_identity() {
        let _ = writeln!(out, "perm: {}", permutation_text(&m.symbols, source.language()));
    }
    for (&u, &v) in &m.map {
        let _ = writeln!(out, "map: {} -> {}", source.name(u), target.name(v));
    }
    out
}

/// A total map `source → target` as a morphism document, without the
/// injectivity requirement of [`parse_morphism`].
pub fn parse_vertex_map(text: &str, source: &Structure, target: &Structure) -> Result<Vec<usize>> {
    let (si, ti) = (source.name_index(), target.name_index());
    let mut out = vec![usize::MAX; source.len()];
    for (no, l) in lines(text) {
        let (key, value) = split_header(no, l)?;
        match key {
            "perm" => continue,
            "map" => {
                let Some((u, v)) = value.split_once("->") else { return err(no, "expected `u -> v`") };
                let Some(&u) = si.get(u.trim()) else { return err(no, format!("unknown source vertex `{}`", u.trim())) };
                let Some(&v) = ti.get(v.trim()) else { return err(no, format!("unknown target vertex `{}`", v.trim())) };
                out[u] = v;
            }
            _ => return err(no, format!("unexpected header `{key}`")),
        }
    }
    if let Some(u) = out.iter().position(|&v| v == usize::MAX) {
        return err(0, format!("vertex {} is not mapped", source.name(u)));
    }
    Ok(out)
}

/// A total map as a document of `map:` lines.
pub fn serialize_vertex_map(map: &[usize], source: &Structure, target: &Structure) -> String {
    map.iter().enumerate().map(|(u, &v)| format!("map: {} -> {}\n", source.name(u), target.name(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const K2: &str = "# an edge\nlanguage: E/2\nvertices: 1 2\nrel E: (1,2) (2,1)\n";

    #[test]
    fn minimal_document() {
        let s = parse_structure("language:\nvertices: a").unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn edge_round_trips() {
        let s = parse_structure(K2).unwrap();
        assert_eq!(s.relation(0).len(), 2);
        let text = serialize_structure(&s);
        assert_eq!(parse_structure(&text).unwrap(), s);
        assert_eq!(serialize_structure(&parse_structure(&text).unwrap()), text);
    }

    #[test]
    fn arity_mismatch_names_the_line() {
        let e = parse_structure("language: E/2\nvertices: 1 2\n\nrel E: (1,2,1)").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn groups_and_functions() {
        let text = "language: U/1, V/1, F!1\ngroup: (), (U V)\nvertices: 1 2\nrel U: (1)\nrel V:\nfun F: 1 -> {2}, 2 -> {1,2}\n";
        let s = parse_structure(text).unwrap();
        assert_eq!(s.language().group().len(), 2);
        assert_eq!(s.function(0, 1), &[0, 1]);
        assert_eq!(serialize_structure(&s), text);
    }

    #[test]
    fn group_must_be_closed() {
        let e = parse_structure("language: U/1, V/1, W/1\ngroup: (), (U V W)\nvertices: 1").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
    }

    #[test]
    fn morphisms_round_trip() {
        let s = parse_structure(K2).unwrap();
        let m = parse_morphism("map: 1 -> 2\nmap: 2 -> 1\n", &s, &s).unwrap();
        assert_eq!(m.map.len(), 2);
        assert_eq!(parse_morphism(&serialize_morphism(&m, &s, &s), &s, &s).unwrap(), m);
        assert!(parse_morphism("map: 1 -> 2\nmap: 2 -> 2\n", &s, &s).is_err());
    }

    #[test]
    fn hash_inside_a_name_is_not_a_comment() {
        let s = parse_structure("language:\nvertices: a#1 b # two vertices").unwrap();
        assert_eq!(s.names(), &["a#1", "b"]);
    }
}
