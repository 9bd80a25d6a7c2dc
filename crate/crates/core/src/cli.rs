//! Command-line driver: `build`, `extend`, `verify` and `report`.
//!
//! Exit codes: 0 built or passed, 1 verification failed, 2 input error,
//! 3 resource limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::format::{parse_morphism, parse_structure, parse_vertex_map, serialize_morphism, serialize_structure, serialize_vertex_map};
use crate::limits::Limits;
use crate::metric::{build_metric_witness_over, EdgeLabelledGraph};
use crate::morphism::{check_morphism, MorphismKind};
use crate::pipeline::build_pipeline_witness;
use crate::structure::Structure;
use crate::verify::{
    audit_witness_size, verify_coherence, verify_eppa_witness, verify_faithfulness, verify_forb_he, verify_metric,
    verify_unwind_property, SizeKind, VerifyReport,
};
use crate::witness::faithful::FaithfulWitness;
use crate::witness::functions::FunctionWitness;
use crate::witness::graph::{is_graph, GraphWitness};
use crate::witness::relational::RelationalWitness;
use crate::witness::unwind::UnwoundWitness;
use crate::witness::{SearchWitness, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Graph,
    Relational,
    Functions,
    Faithful,
    Unwind,
    Pipeline,
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Eppa,
    Coherence,
    Faithful,
    Unwind,
    Size,
    Metric,
    Forbhe,
}

#[derive(Debug, Parser)]
#[command(name = "eppa", version, about = "Build and verify EPPA-witnesses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Base witness options shared by `build`, `extend` and `verify`.
#[derive(Debug, Clone, clap::Args)]
pub struct BaseArgs {
    /// Base witness `B₀`; built from `A` when omitted.
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Embedding `A → B₀`; the identity on names when omitted.
    #[arg(long)]
    pub base_embedding: Option<PathBuf>,
    /// Size bound for the pipeline, clique bound for metric spaces.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Edge relation for unwinding.
    #[arg(long, default_value = "E")]
    pub edge: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a witness for the structure in `--input`.
    Build {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_embedding: Option<PathBuf>,
        #[arg(long)]
        emit_projection: Option<PathBuf>,
    },
    /// Extend a partial automorphism of the copy of `A` inside a witness.
    Extend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        pa: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rebuild with this method and extend constructively instead of by search.
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[command(flatten)]
        base: BaseArgs,
    },
    /// Check a property of a witness.
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        embedding: Option<PathBuf>,
        /// Map `B → B₀` for the unwinding check.
        #[arg(long)]
        projection: Option<PathBuf>,
        /// Construction used for the extender or the size formula.
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[command(flatten)]
        base: BaseArgs,
        /// Forbidden structures for `forbhe`.
        #[arg(long)]
        forbidden: Vec<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        cap: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pretty-print a JSON report.
    Report { json: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_structure(path: &Path) -> Result<Structure> {
    parse_structure(&read(path)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// The default base witness: the graph construction for graphs, the
/// relational one for relational structures and the function layer otherwise.
pub fn default_base(a: &Structure, limits: &Limits) -> Result<Arc<dyn Witness>> {
    if is_graph(a) {
        Ok(Arc::new(GraphWitness::build(a, limits)?))
    } else if a.language().is_relational() {
        Ok(Arc::new(RelationalWitness::build(a, limits)?))
    } else {
        Ok(Arc::new(FunctionWitness::build(a, limits)?))
    }
}

fn load_base(a: &Structure, args: &BaseArgs) -> Result<Option<(Structure, Vec<usize>)>> {
    let Some(path) = &args.base else { return Ok(None) };
    let b0 = read_structure(path)?;
    let psi0 = match &args.base_embedding {
        Some(p) => parse_vertex_map(&read(p)?, a, &b0)?,
        None => (0..a.len())
            .map(|x| b0.vertex(a.name(x)).ok_or_else(|| Error::Input(format!("base lacks vertex {}", a.name(x)))))
            .collect::<Result<_>>()?,
    };
    Ok(Some((b0, psi0)))
}

/// Builds a witness for `a` with `method`, over `base` when given.
pub fn build_witness(
    method: Method,
    a: &Structure,
    base: Option<(Structure, Vec<usize>)>,
    n: usize,
    edge: &str,
    limits: &Limits,
) -> Result<Arc<dyn Witness>> {
    let base_witness = |base: Option<(Structure, Vec<usize>)>| -> Result<Arc<dyn Witness>> {
        match base {
            Some((b0, psi0)) => Ok(Arc::new(SearchWitness::new(a.clone(), b0, psi0, *limits)?)),
            None => default_base(a, limits),
        }
    };
    Ok(match method {
        Method::Graph => Arc::new(GraphWitness::build(a, limits)?),
        Method::Relational => Arc::new(RelationalWitness::build(a, limits)?),
        Method::Functions => match base {
            Some(_) => Arc::new(FunctionWitness::build_over(a, base_witness(base)?, limits)?),
            None => Arc::new(FunctionWitness::build(a, limits)?),
        },
        Method::Faithful => Arc::new(FaithfulWitness::build(base_witness(base)?, limits)?),
        Method::Unwind => Arc::new(UnwoundWitness::build(base_witness(base)?, edge, limits)?),
        Method::Pipeline => Arc::new(build_pipeline_witness(base_witness(base)?, n, limits)?),
        Method::Metric => {
            let ga = EdgeLabelledGraph::from_structure(a)?;
            let (gb, psi0) = match base {
                Some((b0, psi0)) => (EdgeLabelledGraph::from_structure(&b0)?, psi0),
                None => (ga.clone(), (0..a.len()).collect()),
            };
            Arc::new(build_metric_witness_over(&ga, n, &gb, &psi0, limits)?)
        }
    })
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, &Limits::from_env()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn execute(command: Command, limits: &Limits) -> Result<i32> {
    match command {
        Command::Build { method, input, base, out, emit_embedding, emit_projection } => {
            let a = read_structure(&input)?;
            let loaded = load_base(&a, &base)?;
            let base_structure = loaded.as_ref().map(|(b0, _)| b0.clone());
            let w = build_witness(method, &a, loaded, base.n, &base.edge, limits)?;
            write(&out, &serialize_structure(w.structure()))?;
            if let Some(p) = emit_embedding {
                write(&p, &serialize_vertex_map(w.embedding(), &a, w.structure()))?;
            }
            if let Some(p) = emit_projection {
                let Some(proj) = w.projection() else {
                    return Err(Error::Input("this construction has no projection".into()));
                };
                let target = match base_structure {
                    Some(b0) => b0,
                    None => projection_target(method, &a, limits)?,
                };
                write(&p, &serialize_vertex_map(proj, w.structure(), &target))?;
            }
            println!("built {} vertices", w.structure().len());
            Ok(0)
        }
        Command::Extend { input, witness, embedding, pa, out, method, base } => {
            let a = read_structure(&input)?;
            let b = read_structure(&witness)?;
            let psi = parse_vertex_map(&read(&embedding)?, &a, &b)?;
            let phi = parse_morphism(&read(&pa)?, &b, &b)?;
            let extender = extender_for(method, &a, &b, &psi, &base, limits)?;
            let theta = extender.extend(&phi)?;
            if let Err(v) = check_morphism(&theta, MorphismKind::Automorphism, &b, &b) {
                return Err(Error::Precondition(format!("extension is not an automorphism: {v}")));
            }
            write(&out, &serialize_morphism(&theta, &b, &b))?;
            println!("extended to an automorphism of {} vertices", b.len());
            Ok(0)
        }
        Command::Verify {
            check,
            input,
            witness,
            embedding,
            projection,
            method,
            base,
            forbidden,
            json,
            cap,
            samples,
            seed,
        } => {
            let b = read_structure(&witness)?;
            let need_a = || -> Result<(Structure, Vec<usize>)> {
                let Some(input) = &input else { return Err(Error::Input("--input is required".into())) };
                let a = read_structure(input)?;
                let psi = match &embedding {
                    Some(p) => parse_vertex_map(&read(p)?, &a, &b)?,
                    None => return Err(Error::Input("--embedding is required".into())),
                };
                Ok((a, psi))
            };
            let report: VerifyReport = match check {
                Check::Eppa => {
                    let (a, psi) = need_a()?;
                    match method {
                        Some(_) => {
                            let ext = extender_for(method, &a, &b, &psi, &base, limits)?;
                            verify_eppa_witness(&a, &b, &psi, Some(ext.as_ref()), limits)?
                        }
                        None => verify_eppa_witness(&a, &b, &psi, None, limits)?,
                    }
                }
                Check::Coherence => {
                    let (a, psi) = need_a()?;
                    if method.is_none() {
                        return Err(Error::Input("coherence needs --method to rebuild the extender".into()));
                    }
                    let ext = extender_for(method, &a, &b, &psi, &base, limits)?;
                    verify_coherence(&a, &b, &psi, ext.as_ref(), limits)?
                }
                Check::Faithful => {
                    let (a, psi) = need_a()?;
                    verify_faithfulness(&a, &b, &psi, limits)?
                }
                Check::Unwind => {
                    let Some(bp) = &base.base else { return Err(Error::Input("--base is required".into())) };
                    let b0 = read_structure(bp)?;
                    let Some(pp) = &projection else { return Err(Error::Input("--projection is required".into())) };
                    let f = parse_vertex_map(&read(pp)?, &b, &b0)?;
                    let Some(e) = b.language().relation_index(&base.edge) else {
                        return Err(Error::Input(format!("no relation named {}", base.edge)));
                    };
                    verify_unwind_property(&b, &b0, &f, e, cap, samples, seed, limits)?
                }
                Check::Size => {
                    let Some(input) = &input else { return Err(Error::Input("--input is required".into())) };
                    let a = read_structure(input)?;
                    let kind = match method {
                        Some(Method::Graph) => SizeKind::Graph,
                        Some(Method::Relational) => SizeKind::Relational,
                        Some(Method::Functions) => SizeKind::Functions,
                        Some(Method::Faithful) => SizeKind::Faithful,
                        Some(Method::Unwind) => SizeKind::Unwind,
                        Some(Method::Pipeline) => SizeKind::Pipeline { rounds: crate::pipeline::unwinding_rounds(base.n) },
                        _ => return Err(Error::Input("size needs --method other than metric".into())),
                    };
                    let base_len = match &base.base {
                        Some(p) => Some(read_structure(p)?.len()),
                        None => None,
                    };
                    audit_witness_size(kind, &a, b.len(), base_len)
                }
                Check::Metric => verify_metric(&b, base.n),
                Check::Forbhe => {
                    let fs: Vec<Structure> = forbidden.iter().map(|p| read_structure(p)).collect::<Result<_>>()?;
                    verify_forb_he(&fs, &b, limits)?
                }
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            if let Some(p) = json {
                write(&p, &text)?;
            }
            println!("{}", summary(&report));
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Report { json } => {
            let report: VerifyReport =
                serde_json::from_str(&read(&json)?).map_err(|e| Error::Input(format!("{}: {e}", json.display())))?;
            println!("{}", summary(&report));
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

/// The structure a default-built witness projects onto.
fn projection_target(method: Method, a: &Structure, limits: &Limits) -> Result<Structure> {
    Ok(match method {
        Method::Graph | Method::Relational | Method::Metric => a.clone(),
        Method::Functions => FunctionWitness::build(a, limits)?.base_witness().structure().clone(),
        _ => default_base(a, limits)?.structure().clone(),
    })
}

/// A constructive extender rebuilt with `method`, or backtracking search.
fn extender_for(
    method: Option<Method>,
    a: &Structure,
    b: &Structure,
    psi: &[usize],
    base: &BaseArgs,
    limits: &Limits,
) -> Result<Arc<dyn Witness>> {
    match method {
        None => Ok(Arc::new(SearchWitness::new(a.clone(), b.clone(), psi.to_vec(), *limits)?)),
        Some(m) => {
            let loaded = load_base(a, base)?;
            let w = build_witness(m, a, loaded, base.n, &base.edge, limits)?;
            if w.structure() != b || w.embedding() != psi {
                return Err(Error::Input("rebuilt witness differs from the given one".into()));
            }
            Ok(w)
        }
    }
}

/// One-line human summary of a report.
pub fn summary(r: &VerifyReport) -> String {
    let verdict = if r.pass { "PASS" } else { "FAIL" };
    let mut s = format!("{verdict} {:?} on |B| = {} ({} checked)", r.check, r.instance.b_vertices, r.stats.checked);
    if let Some(c) = &r.counterexample {
        s.push_str(&format!("; counterexample: {}", serde_json::to_string(c).expect("serializes")));
    }
    s
}
