//! Reads a structure in the text format, builds a witness and drives the
//! command line in-process.

use eppa::format::{parse_structure, serialize_structure};

const INPUT: &str = "\
# two points swapped by the symbol group
language: P/1, Q/1
group: (), (P Q)
vertices: u v
rel P: (u)
rel Q: (v)
";

fn main() -> eppa::Result<()> {
    let a = parse_structure(INPUT)?;
    print!("{}", serialize_structure(&a));

    let dir = std::env::temp_dir().join(format!("eppa-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = |name: &str| dir.join(name).display().to_string();
    std::fs::write(path("a.struct"), INPUT).expect("write input");

    let build = ["eppa", "build", "--method", "relational", "--input", &path("a.struct"), "--out", &path("b.struct"),
        "--emit-embedding", &path("psi.map")];
    let code = eppa::cli::run(build);
    println!("build exit code {code}");
    let verify = ["eppa", "verify", "--check", "eppa", "--input", &path("a.struct"), "--witness", &path("b.struct"),
        "--embedding", &path("psi.map"), "--json", &path("report.json")];
    println!("verify exit code {}", eppa::cli::run(verify));
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
