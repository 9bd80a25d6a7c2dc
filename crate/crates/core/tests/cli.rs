use std::fs;
use std::path::Path;

use eppa::cli::run;
use eppa::format::parse_structure;
use eppa::verify::VerifyReport;

const K2: &str = "language: E/2\nvertices: 1 2\nrel E: (1,2) (2,1)\n";
const P3: &str = "# a path\nlanguage: E/2\nvertices: a b c\nrel E: (a,b) (b,a) (b,c) (c,b)\n";

fn eppa(dir: &Path, args: &[&str]) -> i32 {
    let args: Vec<String> = std::iter::once("eppa".to_string())
        .chain(args.iter().map(|a| if a.contains('.') { dir.join(a).display().to_string() } else { a.to_string() }))
        .collect();
    run(args)
}

fn report(dir: &Path, name: &str) -> VerifyReport {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn build_extend_and_verify_an_edge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.struct"), K2).unwrap();
    let code = eppa(
        d,
        &["build", "--method", "graph", "--input", "a.struct", "--out", "b.struct", "--emit-embedding", "psi.map", "--emit-projection", "pi.map"],
    );
    assert_eq!(code, 0);
    let b = parse_structure(&fs::read_to_string(d.join("b.struct")).unwrap()).unwrap();
    assert_eq!(b.len(), 4);

    let code = eppa(d, &["verify", "--check", "eppa", "--input", "a.struct", "--witness", "b.struct", "--embedding", "psi.map", "--json", "r.json"]);
    assert_eq!(code, 0);
    let r = report(d, "r.json");
    assert!(r.pass);
    assert_eq!(r.instance.b_vertices, 4);

    let code = eppa(
        d,
        &["verify", "--check", "coherence", "--method", "graph", "--input", "a.struct", "--witness", "b.struct", "--embedding", "psi.map", "--json", "c.json"],
    );
    assert_eq!(code, 0);
    assert_eq!(eppa(d, &["verify", "--check", "size", "--method", "graph", "--input", "a.struct", "--witness", "b.struct"]), 0);

    // swap the two copies of the endpoints
    let psi = fs::read_to_string(d.join("psi.map")).unwrap();
    let targets: Vec<&str> = psi.lines().map(|l| l.rsplit(' ').next().unwrap()).collect();
    fs::write(d.join("phi.map"), format!("map: {0} -> {1}\nmap: {1} -> {0}\n", targets[0], targets[1])).unwrap();
    for method in [None, Some("graph")] {
        let mut args = vec!["extend", "--input", "a.struct", "--witness", "b.struct", "--embedding", "psi.map", "--pa", "phi.map", "--out", "theta.map"];
        if let Some(m) = method {
            args.extend(["--method", m]);
        }
        assert_eq!(eppa(d, &args), 0);
        let theta = eppa::format::parse_morphism(&fs::read_to_string(d.join("theta.map")).unwrap(), &b, &b).unwrap();
        assert_eq!(eppa::check_morphism(&theta, eppa::MorphismKind::Automorphism, &b, &b), Ok(()));
    }
    assert_eq!(eppa(d, &["report", "r.json"]), 0);
}

#[test]
fn a_path_is_not_its_own_witness() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.struct"), P3).unwrap();
    fs::write(d.join("id.map"), "map: a -> a\nmap: b -> b\nmap: c -> c\n").unwrap();
    let code = eppa(d, &["verify", "--check", "eppa", "--input", "p.struct", "--witness", "p.struct", "--embedding", "id.map", "--json", "r.json"]);
    assert_eq!(code, 1);
    let r = report(d, "r.json");
    assert!(!r.pass);
    assert!(r.counterexample.is_some());
    assert_eq!(eppa(d, &["report", "r.json"]), 1);
}

#[test]
fn unwinding_and_metric_builds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.struct"), K2).unwrap();
    let c4 = "language: E/2\nvertices: 1 2 3 4\nrel E: (1,2) (2,1) (2,3) (3,2) (3,4) (4,3) (4,1) (1,4)\n";
    fs::write(d.join("c4.struct"), c4).unwrap();
    let code = eppa(
        d,
        &["build", "--method", "unwind", "--input", "a.struct", "--base", "c4.struct", "--out", "u.struct", "--emit-embedding", "psi.map", "--emit-projection", "pi.map"],
    );
    assert_eq!(code, 0);
    let code = eppa(
        d,
        &["verify", "--check", "unwind", "--witness", "u.struct", "--base", "c4.struct", "--projection", "pi.map", "--cap", "5", "--samples", "200", "--seed", "7", "--json", "u.json"],
    );
    assert_eq!(code, 0);
    let r = report(d, "u.json");
    assert_eq!(r.stats.seed, Some(7));
    assert_eq!(r.stats.cap, Some(5));

    let m = "language: d1/2, d2/2\nvertices: x y z\nrel d1: (x,y) (y,x)\nrel d2: (x,z) (z,x) (y,z) (z,y)\n";
    fs::write(d.join("m.struct"), m).unwrap();
    assert_eq!(eppa(d, &["build", "--method", "metric", "--n", "3", "--input", "m.struct", "--out", "mb.struct", "--emit-embedding", "mpsi.map"]), 0);
    assert_eq!(eppa(d, &["verify", "--check", "metric", "--n", "3", "--witness", "mb.struct"]), 0);
    assert_eq!(eppa(d, &["verify", "--check", "faithful", "--input", "m.struct", "--witness", "mb.struct", "--embedding", "mpsi.map"]), 0);
}

#[test]
fn forbidden_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let k3 = "language: E/2\nvertices: 1 2 3\nrel E: (1,2) (2,1) (2,3) (3,2) (1,3) (3,1)\n";
    fs::write(d.join("k3.struct"), k3).unwrap();
    fs::write(d.join("p.struct"), P3).unwrap();
    assert_eq!(eppa(d, &["verify", "--check", "forbhe", "--witness", "p.struct", "--forbidden", "k3.struct"]), 0);
    assert_eq!(eppa(d, &["verify", "--check", "forbhe", "--witness", "k3.struct", "--forbidden", "k3.struct"]), 1);
}

#[test]
fn exit_codes_for_bad_input_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.struct"), "language: E/2\nvertices: 1\nrel E: (1,9)\n").unwrap();
    fs::write(d.join("p.struct"), P3).unwrap();
    assert_eq!(eppa(d, &["build", "--method", "graph", "--input", "bad.struct", "--out", "x.struct"]), 2);
    assert_eq!(eppa(d, &["build", "--method", "graph", "--input", "missing.struct", "--out", "x.struct"]), 2);
    assert_eq!(eppa(d, &["frobnicate"]), 2);
    // unwinding needs the edge relation complete on A
    assert_eq!(eppa(d, &["build", "--method", "unwind", "--input", "p.struct", "--base", "p.struct", "--out", "x.struct"]), 2);
}

#[test]
fn the_binary_reports_resource_limits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.struct"), P3).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_eppa"))
        .args(["build", "--method", "graph", "--input"])
        .arg(d.join("p.struct"))
        .arg("--out")
        .arg(d.join("b.struct"))
        .env("EPPA_MAX_VERTICES", "5")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
