use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dicube::approx::{cubical_approximation, simplicial_approximation, star_condition, PLVertexMap};
use dicube::extension::{ex, ex_iter, upsilon, CoendBudget};
use dicube::generate::{grid, interval, pair_dipath, path, random_annulus_dipath, square_annulus, tri_vertex};
use dicube::homotopy::{directed_equivalence_probe, homotopy_graph, Cylinder, Diagram};
use dicube::io::{self, AnyComplex};
use dicube::order::Preorder;
use dicube::presheaf::{enumerate_morphisms, representable, CellId, Morphism, Presheaf, SearchOptions, Tensor};
use dicube::site::{Cube, Simplex, Site};
use dicube::subdivision::{Subdividable, Tower};
use dicube::triangulation::{nerve_cubical, nerve_simplicial, qua, tri};
use dicube::verify::{run_suite, EXTRA_SUITES, SUITES};
use dicube::{Error, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dicube", version, about = "Cubical and simplicial presheaves, subdivision and directed homotopy")]
struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SiteArg {
    Cube,
    Simplex,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Via {
    /// The complex itself.
    None,
    /// Its extension ex C.
    Ex,
    /// Its triangulation.
    Tri,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Source,
    Target,
}

#[derive(Subcommand)]
enum Command {
    /// Cell counts and basic invariants of a complex file.
    Info { file: PathBuf },
    /// Iterated subdivision sd^K.
    Subdivide {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Triangulation of a cubical complex.
    Tri { file: PathBuf },
    /// Quadrangulation of a simplicial complex, stored through dimension D.
    Qua {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
    /// Iterated extension ex^K of a cubical complex.
    Ex {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Largest total size of the ⊞-objects in the coend.
        #[arg(long, default_value_t = 3)]
        budget: usize,
        /// Highest stored level.
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Print level counts and stability instead of the complex.
        #[arg(long)]
        report: bool,
    },
    /// Tensor product of two cubical complexes.
    Tensor { left: PathBuf, right: PathBuf },
    /// Morphisms between two complexes over the same site.
    Hom {
        source: PathBuf,
        target: PathBuf,
        /// List the morphisms, not only their number.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 50_000_000)]
        node_budget: usize,
    },
    /// Homotopy classes of dipaths of a given length with pinned endpoints.
    Classes {
        file: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Number of edges of the source path.
        #[arg(long)]
        len: usize,
        /// Where to count; cubical complexes default to ex, simplicial ones to themselves.
        #[arg(long, value_enum)]
        via: Option<Via>,
        /// Coend budget when going through ex.
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long, default_value_t = 50_000_000)]
        node_budget: usize,
    },
    /// Compares h(A, ex^K B) → h(A, ex^K C) along a cubical function B → C for representable probes A.
    ProbeEquivalence {
        source: PathBuf,
        target: PathBuf,
        /// Morphism file for ψ: source → target.
        map: PathBuf,
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        budget: usize,
        /// Probe with □[0], …, □[N].
        #[arg(long, default_value_t = 1)]
        probe_dim: usize,
        #[arg(long, default_value_t = 50_000_000)]
        node_budget: usize,
    },
    /// Simplicial or cubical approximation of a PL map file.
    Approximate {
        file: PathBuf,
        /// Most subdivisions to try.
        #[arg(long, default_value_t = 6)]
        cap: usize,
    },
    /// Example complexes, diagrams and PL maps.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Runs a lemma suite, or `all`.
    Verify {
        suite: Option<String>,
        /// Print the suite names.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum Family {
    /// □[m] ⊗ □[n] subdivided into unit squares: the tensor of two paths.
    Grid { m: usize, n: usize },
    /// The 3×3 grid without its center square.
    Annulus,
    /// sd^K of the interval.
    Interval {
        k: usize,
        #[arg(long, value_enum, default_value_t = SiteArg::Cube)]
        site: SiteArg,
    },
    /// A directed path of M edges.
    Path {
        m: usize,
        #[arg(long, value_enum, default_value_t = SiteArg::Cube)]
        site: SiteArg,
    },
    /// The representable of dimension N.
    Representable {
        n: usize,
        #[arg(long, value_enum, default_value_t = SiteArg::Cube)]
        site: SiteArg,
    },
    /// The nerve of a preorder, truncated at a level.
    Nerve {
        /// Number of points.
        #[arg(long)]
        points: usize,
        /// Relations a<=b, comma separated.
        #[arg(long, conflicts_with = "index")]
        relations: Option<String>,
        /// Index into the preorders on the points up to isomorphism.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = SiteArg::Cube)]
        site: SiteArg,
    },
    /// One side of the pair ∂□[1] ↪ path(len) → complex with pinned endpoints.
    PairDipath {
        /// Complex file; the annulus when omitted.
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        len: usize,
        #[arg(long, value_enum, default_value_t = Side::Target)]
        side: Side,
    },
    /// A random PL dipath across the triangulated annulus, as an exact PL map file.
    RandomDipath {
        /// The source path has 2^K edges.
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Violation(_) => (1, "violation"),
            Error::Parse(_) => (2, "parse"),
            Error::Invalid(_) => (2, "invalid"),
            Error::SizeCap(_) => (2, "size_cap"),
            Error::Budget(_) => (2, "budget"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "usage", message: message.into() }
}

type Out = std::result::Result<Output, Failure>;

enum Output {
    /// Already canonical text.
    Text(String),
    Json(Value),
    /// A report whose verdict decides the exit code.
    Report(Value, bool),
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn complex(path: &Path) -> std::result::Result<AnyComplex, Failure> {
    io::load_any_complex(&read(path)?).map_err(|e| at(path, e))
}

fn cubical(path: &Path) -> std::result::Result<Presheaf<Cube>, Failure> {
    match complex(path)? {
        AnyComplex::Cube(p) => Ok(p),
        AnyComplex::Simplex(_) => Err(usage(format!("{}: a cubical complex is required", path.display()))),
    }
}

fn at(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn to_value(text: &str) -> Value {
    serde_json::from_str(text).expect("canonical output is JSON")
}

fn euler(counts: &[usize]) -> i64 {
    counts.iter().enumerate().map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
}

fn info(c: &AnyComplex) -> Value {
    let (site, trunc, dim) = match c {
        AnyComplex::Cube(p) => ("cube", p.truncation(), p.dim()),
        AnyComplex::Simplex(p) => ("simplex", p.truncation(), p.dim()),
    };
    let counts = c.counts();
    json!({
        "site": site,
        "cells": counts,
        "total": counts.iter().sum::<usize>(),
        "dim": dim,
        "euler": euler(&counts),
        "truncation": trunc,
    })
}

fn subdivide<S: Subdividable>(p: &Presheaf<S>, times: usize) -> String {
    io::save_complex(Tower::new(p, times).top())
}

fn hom<S: Site>(a: &Presheaf<S>, b: &Presheaf<S>, list: bool, node_budget: usize) -> Out {
    let opts = SearchOptions { node_budget, ..SearchOptions::default() };
    let ms = enumerate_morphisms(a, b, &opts)?;
    let mut v = json!({ "count": ms.len() });
    if list {
        v["morphisms"] = ms.iter().map(|m| to_value(&io::save_morphism(m))).collect();
    }
    Ok(Output::Json(v))
}

fn dipath_classes<S: Cylinder>(c: &Presheaf<S>, from: usize, to: usize, len: usize, node_budget: usize) -> Out {
    for v in [from, to] {
        if v >= c.count(0) {
            return Err(usage(format!("vertex {v} does not exist; the complex has {}", c.count(0))));
        }
    }
    let (src, tgt, id) = pair_dipath::<S>(c, from, to, len)?;
    let g = homotopy_graph(&src, &tgt, &[(0, id)], node_budget)?;
    let labels = g.classes();
    let mut sizes = vec![0usize; g.class_count()];
    for l in labels {
        sizes[l] += 1;
    }
    Ok(Output::Json(json!({ "classes": sizes.len(), "dipaths": g.nodes.len(), "class_sizes": sizes })))
}

fn run_classes_cube(c: &Presheaf<Cube>, from: usize, to: usize, len: usize, via: Via, budget: usize, node_budget: usize) -> Out {
    if from.max(to) >= c.count(0) {
        return Err(usage(format!("vertex {} does not exist; the complex has {}", from.max(to), c.count(0))));
    }
    match via {
        Via::None => dipath_classes(c, from, to, len, node_budget),
        Via::Tri => {
            let t = tri(c);
            let tv = |v: usize| tri_vertex(&t, v);
            dipath_classes(t.presheaf(), tv(from), tv(to), len, node_budget)
        }
        Via::Ex => {
            let e = ex(c, CoendBudget { max_size: budget, ..CoendBudget::default() })?;
            let u = upsilon(c, &e)?;
            let ev = |v: usize| u.image(CellId::new(0, v)).base.idx;
            dipath_classes(&e.presheaf, ev(from), ev(to), len, node_budget)
        }
    }
}

fn parse_relations(points: usize, text: &str) -> std::result::Result<Preorder, Failure> {
    let mut rel = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once("<=").ok_or_else(|| usage(format!("relation \"{item}\" is not of the form a<=b")))?;
        let num = |s: &str| -> std::result::Result<usize, Failure> {
            match s.trim().parse::<usize>() {
                Ok(x) if x < points => Ok(x),
                _ => Err(usage(format!("\"{s}\" is not a point below {points}"))),
            }
        };
        rel.push((num(a)?, num(b)?));
    }
    Ok(Preorder::from_relations(points, &rel))
}

fn save_any(site: SiteArg, cube: impl FnOnce() -> Presheaf<Cube>, simplex: impl FnOnce() -> Presheaf<Simplex>) -> String {
    match site {
        SiteArg::Cube => io::save_complex(&cube()),
        SiteArg::Simplex => io::save_complex(&simplex()),
    }
}

fn generate(family: Family, seed: u64) -> Out {
    Ok(Output::Text(match family {
        Family::Grid { m, n } => io::save_complex(&grid(m, n).presheaf),
        Family::Annulus => io::save_complex(&square_annulus()),
        Family::Interval { k, site } => save_any(site, || interval::<Cube>(k), || interval::<Simplex>(k)),
        Family::Path { m, site } => save_any(site, || path::<Cube>(m), || path::<Simplex>(m)),
        Family::Representable { n, site } => {
            save_any(site, || representable::<Cube>(n).presheaf, || representable::<Simplex>(n).presheaf)
        }
        Family::Nerve { points, relations, index, levels, site } => {
            let p = match (relations, index) {
                (Some(r), _) => parse_relations(points, &r)?,
                (None, Some(i)) => {
                    let all = Preorder::all_up_to_iso(points);
                    let n = all.len();
                    all.into_iter().nth(i).ok_or_else(|| usage(format!("there are {n} preorders on {points} points")))?
                }
                (None, None) => Preorder::antichain(points),
            };
            save_any(site, || nerve_cubical(&p, levels).presheaf, || nerve_simplicial(&p, levels).presheaf)
        }
        Family::PairDipath { complex: file, from, to, len, side } => {
            let c = match file {
                Some(f) => complex(&f)?,
                None => AnyComplex::Cube(square_annulus()),
            };
            fn pick<S: Site>(c: &Presheaf<S>, from: usize, to: usize, len: usize, side: Side) -> dicube::Result<String> {
                let (src, tgt, _) = pair_dipath::<S>(c, from, to, len)?;
                Ok(io::save_diagram(match side {
                    Side::Source => &src,
                    Side::Target => &tgt,
                }))
            }
            match c {
                AnyComplex::Cube(p) => pick(&p, from, to, len, side)?,
                AnyComplex::Simplex(p) => pick(&p, from, to, len, side)?,
            }
        }
        Family::RandomDipath { k } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_annulus_dipath(&mut rng, k)?;
            let exact: PLVertexMap<Simplex, Rational> =
                d.map.map_scalars(|x| Rational::approximate_float(*x).expect("dyadic coordinates are representable"));
            exact.validate()?;
            io::save_pl_map(&exact)
        }
    }))
}

fn approximate(text: &str, cap: usize) -> Out {
    let site = to_value(text).pointer("/source/site").and_then(Value::as_str).map(str::to_owned);
    match site.as_deref() {
        Some("simplex") => {
            let f: PLVertexMap<Simplex, Rational> = io::load_pl_map(text)?;
            let s = simplicial_approximation(&f, cap)?;
            Ok(Output::Json(json!({
                "depth": s.k,
                "star_at_depth_0": star_condition(&f).holds(),
                "source_cells": s.tower.top().counts(),
                "map": to_value(&io::save_morphism(&s.psi)),
            })))
        }
        Some("cube") => {
            let f: PLVertexMap<Cube, Rational> = io::load_pl_map(text)?;
            let q = qua(&f.target, f.source.top())?;
            let s = cubical_approximation(&f, &q, cap)?;
            Ok(Output::Json(json!({
                "depth": s.k,
                "star_at_depth_0": star_condition(&f).holds(),
                "source_cells": s.tower.top().counts(),
                "map": to_value(&io::save_morphism(&s.transpose)),
            })))
        }
        _ => Err(Failure::from(Error::Parse("the source complex names no known site".into()))),
    }
}

fn run(cli: Cli) -> Out {
    match cli.command {
        Command::Info { file } => Ok(Output::Json(info(&complex(&file)?))),
        Command::Subdivide { file, times } => Ok(Output::Text(match complex(&file)? {
            AnyComplex::Cube(p) => subdivide(&p, times),
            AnyComplex::Simplex(p) => subdivide(&p, times),
        })),
        Command::Tri { file } => Ok(Output::Text(io::save_complex(tri(&cubical(&file)?).presheaf()))),
        Command::Qua { file, max_dim } => match complex(&file)? {
            AnyComplex::Simplex(x) => Ok(Output::Text(io::save_complex(qua(&x, max_dim)?.presheaf()))),
            AnyComplex::Cube(_) => Err(usage(format!("{}: a simplicial complex is required", file.display()))),
        },
        Command::Ex { file, depth, budget, max_dim, report } => {
            let c = cubical(&file)?;
            let t = ex_iter(&c, depth, CoendBudget { max_size: budget, max_dim })?;
            if report {
                let stages: Vec<_> = t.stages.iter().map(|s| s.counts()).collect();
                Ok(Output::Json(json!({ "stages": stages, "stable": t.stable })))
            } else {
                Ok(Output::Text(io::save_complex(t.stages.last().expect("stage 0 exists"))))
            }
        }
        Command::Tensor { left, right } => Ok(Output::Text(io::save_complex(&Tensor::new(&cubical(&left)?, &cubical(&right)?).presheaf))),
        Command::Hom { source, target, list, node_budget } => match (complex(&source)?, complex(&target)?) {
            (AnyComplex::Cube(a), AnyComplex::Cube(b)) => hom(&a, &b, list, node_budget),
            (AnyComplex::Simplex(a), AnyComplex::Simplex(b)) => hom(&a, &b, list, node_budget),
            _ => Err(usage("both complexes must live over the same site")),
        },
        Command::Classes { file, from, to, len, via, budget, node_budget } => match (complex(&file)?, via) {
            (AnyComplex::Cube(c), None) => run_classes_cube(&c, from, to, len, Via::Ex, budget, node_budget),
            (AnyComplex::Simplex(x), None) => dipath_classes(&x, from, to, len, node_budget),
            (AnyComplex::Cube(c), Some(via)) => run_classes_cube(&c, from, to, len, via, budget, node_budget),
            (AnyComplex::Simplex(x), Some(Via::None)) => dipath_classes(&x, from, to, len, node_budget),
            (AnyComplex::Simplex(_), Some(_)) => Err(usage("--via ex and --via tri take a cubical complex")),
        },
        Command::ProbeEquivalence { source, target, map, depth, budget, probe_dim, node_budget } => {
            let (b, c) = (cubical(&source)?, cubical(&target)?);
            let psi: Morphism = io::load_morphism(&read(&map)?, &b, &c).map_err(|e| at(&map, e))?;
            let probes: Vec<(String, Diagram<Cube>)> =
                (0..=probe_dim).map(|n| (format!("□[{n}]"), Diagram::single(representable::<Cube>(n).presheaf))).collect();
            let budget = CoendBudget { max_size: budget, ..CoendBudget::default() };
            let r = directed_equivalence_probe(&vec![psi], &Diagram::single(b), &Diagram::single(c), &probes, depth, budget, node_budget)?;
            let all = r.iter().all(|p| p.injective && p.surjective);
            let probes: Vec<Value> = r
                .iter()
                .map(|p| {
                    json!({
                        "probe": p.probe,
                        "source_classes": p.source_classes,
                        "target_classes": p.target_classes,
                        "injective": p.injective,
                        "surjective": p.surjective,
                        "stable": p.stable,
                    })
                })
                .collect();
            Ok(Output::Json(json!({ "depth": depth, "bijective_on_all_probes": all, "probes": probes })))
        }
        Command::Approximate { file, cap } => approximate(&read(&file)?, cap).map_err(|mut f| {
            f.message = format!("{}: {}", file.display(), f.message);
            f
        }),
        Command::Generate { family } => generate(family, cli.seed),
        Command::Verify { suite, list } => {
            if list {
                let names: Vec<&str> = SUITES.iter().chain(EXTRA_SUITES).copied().collect();
                return Ok(Output::Json(json!({ "all": SUITES, "suites": names })));
            }
            let suite = suite.ok_or_else(|| usage("name a suite, `all`, or pass --list"))?;
            let reports = run_suite(&suite, cli.seed).map_err(|e| match e {
                Error::Invalid(m) => usage(m),
                e => e.into(),
            })?;
            let pass = reports.iter().all(|r| r.pass);
            let failed = reports.iter().filter(|r| !r.pass).count();
            Ok(Output::Report(
                json!({ "suite": suite, "seed": cli.seed, "pass": pass, "cases": reports.len(), "failed": failed, "reports": reports }),
                pass,
            ))
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> std::result::Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprint!("{}", io::canonical(&json!({ "error": "usage", "message": first })));
            return ExitCode::from(2);
        }
    };
    let output = cli.output.clone();
    let result = run(cli).and_then(|out| {
        let (text, pass) = match out {
            Output::Text(t) => (t, true),
            Output::Json(v) => (io::canonical(&v), true),
            Output::Report(v, pass) => (io::canonical(&v), pass),
        };
        emit(&text, output.as_deref())?;
        Ok(pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprint!("{}", io::canonical(&json!({ "error": f.kind, "message": f.message })));
            ExitCode::from(f.code)
        }
    }
}
