//! The lemma-verification suites and the sampled checks behind them.
//!
//! Every case yields a [`CaseReport`]; a failed case is a defect. Cases of a
//! suite run on separate threads and are reported in a fixed order.

use crate::approx::{min_position, simplex_join, simplex_leq, simplex_meet, simplicial_approximation, approx_eq, Scalar};
use crate::error::{Error, Result};
use crate::extension::{ex, ex_morphism, ex_representable_check, nerve_composition, upsilon, zeta, CoendBudget};
use crate::generate::{
    grid_vertex, pair_dipath, path, path_morphism, path_walk, random_annulus_dipath, square_annulus, tri_vertex, without_stops,
};
use crate::homotopy::{convex_nerve_check, homotopy_graph, Diagram};
use crate::order::{Preorder, Shape};
use crate::presheaf::{enumerate_morphisms, representable, Cell, CellId, Morphism, Presheaf, SearchOptions};
use crate::site::{Cube, Simplex, Site};
use crate::subdivision::{fold_atomic, gamma_gamma_bar, sd_cubical, star_collapse_check, Subdividable, Subdivision, Tower};
use crate::triangulation::{graph_nerve_check, qt_colimit_check, sd_tri_comparison, tri};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One line of a verification report.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CaseReport {
    pub suite: String,
    pub case: String,
    pub pass: bool,
    pub detail: String,
}

type Case = (String, Box<dyn Fn() -> Result<String> + Send + Sync>);

/// Suites run by `all`.
pub const SUITES: &[&str] = &[
    "cd_fold",
    "sd_cd_tri",
    "qt",
    "graph_nerves",
    "convex_nerves",
    "cx_unit",
    "classes",
    "approximation",
    "lattice",
];

/// Suites available by name only. `ex_representables` asks for
/// ex □⟦n⟧ ≅ ner^□⟦n⟧ up to n = 2, which fails at n = 2.
pub const EXTRA_SUITES: &[&str] = &["ex_representables"];

/// The default coend budget and the larger one it is checked against.
pub const EX_BUDGET: CoendBudget = CoendBudget { max_size: 3, max_dim: 2 };

/// Cubical fixtures of dimension at most 2.
pub fn cube_fixtures() -> Vec<(&'static str, Presheaf<Cube>)> {
    vec![
        ("□[0]", representable::<Cube>(0).presheaf),
        ("□[1]", representable::<Cube>(1).presheaf),
        ("□⟦2⟧", representable::<Cube>(2).presheaf),
        ("glued intervals", path::<Cube>(2)),
        ("annulus", square_annulus()),
    ]
}

/// The morphism □[m] → □[n] (or Δ[m] → Δ[n]) of a site map m → n.
pub fn yoneda_morphism<S: Site>(f: &S::Map) -> Morphism {
    let (m, n) = (S::dom(f), S::cod(f));
    let src = representable::<S>(m);
    let tgt = representable::<S>(n).presheaf;
    let top = Cell::nd(CellId::new(n, 0));
    let images = (0..=m).map(|k| src.nondeg[k].iter().map(|g| tgt.act(top, &S::compose(f, g))).collect()).collect();
    Morphism { images }
}

/// Every site map between representables of dimension ≤ 2, as morphisms.
pub fn representable_morphisms() -> Vec<(String, usize, usize, Morphism)> {
    let mut out = Vec::new();
    for m in 0..=2 {
        for n in 0..=2 {
            for (i, f) in Cube::hom(m, n).iter().enumerate() {
                out.push((format!("□[{m}]→□[{n}] #{i}"), m, n, yoneda_morphism::<Cube>(f)));
            }
        }
    }
    out
}

/// Folding on every atomic A ⊂ sd²C and star collapse at every vertex.
/// Returns (atomic subpresheaves folded, vertices checked).
pub fn fold_check<S: Subdividable>(c: &Presheaf<S>) -> Result<(usize, usize)> {
    let tower = Tower::new(c, 2);
    let gg = gamma_gamma_bar(&tower);
    let top = tower.top();
    let mut atoms = 0;
    for a in top.all_cells() {
        fold_atomic(&tower, &gg, a)?;
        atoms += 1;
    }
    for v in 0..top.count(0) {
        star_collapse_check(&tower, &gg, v)?;
    }
    Ok((atoms, top.count(0)))
}

/// υ and ζ naturality along every map out of glued intervals into □⟦2⟧
/// and into the annulus.
pub fn glued_interval_naturality() -> Result<String> {
    let p2 = path::<Cube>(2);
    let opts = SearchOptions::default();
    let mut counts = Vec::new();
    for (name, c) in [("□⟦2⟧", representable::<Cube>(2).presheaf), ("the annulus", square_annulus())] {
        let hs = enumerate_morphisms(&p2, &c, &opts)?;
        let tag = |e: Error| Error::Violation(format!("into {name}: {e}"));
        upsilon_naturality(&hs, &p2, &c, EX_BUDGET).map_err(tag)?;
        zeta_naturality(&hs, &p2, &c, EX_BUDGET).map_err(tag)?;
        counts.push(format!("{} maps into {name}", hs.len()));
    }
    Ok(counts.join(", "))
}

/// ex h ∘ υ_C = υ_{C'} ∘ h for every h: C → C' in `hs`.
pub fn upsilon_naturality(hs: &[Morphism], c1: &Presheaf<Cube>, c2: &Presheaf<Cube>, budget: CoendBudget) -> Result<()> {
    let (e1, e2) = (ex(c1, budget)?, ex(c2, budget)?);
    let (u1, u2) = (upsilon(c1, &e1)?, upsilon(c2, &e2)?);
    for (i, h) in hs.iter().enumerate() {
        let lhs = h.then(&u2, c2);
        let rhs = u1.then(&ex_morphism(h, c2, &e1, &e2), &e1.presheaf);
        if lhs != rhs {
            return Err(Error::Violation(format!("υ is not natural along map #{i}")));
        }
    }
    Ok(())
}

/// ex sd h ∘ ζ_C = ζ_{C'} ∘ h for every h: C → C' in `hs`.
pub fn zeta_naturality(hs: &[Morphism], c1: &Presheaf<Cube>, c2: &Presheaf<Cube>, budget: CoendBudget) -> Result<()> {
    // ζ lands in [2]^n
    let budget = CoendBudget { max_size: budget.max_size.max(2 * c1.top().max(c2.top())), ..budget };
    let (s1, s2) = (sd_cubical(c1), sd_cubical(c2));
    let (e1, e2) = (ex(s1.presheaf(), budget)?, ex(s2.presheaf(), budget)?);
    let (z1, z2) = (zeta(c1, &s1, &e1)?, zeta(c2, &s2, &e2)?);
    for (i, h) in hs.iter().enumerate() {
        let sdh = Cube::subdivide_morphism(h, &s1, &s2, c2);
        let lhs = h.then(&z2, c2);
        let rhs = z1.then(&ex_morphism(&sdh, s2.presheaf(), &e1, &e2), &e1.presheaf);
        if lhs != rhs {
            return Err(Error::Violation(format!("ζ is not natural along map #{i}")));
        }
    }
    Ok(())
}

/// υ and ζ naturality along every site map between representables of
/// dimension ≤ 2. Returns the number of maps.
pub fn representable_naturality(budget: CoendBudget) -> Result<usize> {
    let mut count = 0;
    for m in 0..=2 {
        for n in 0..=2 {
            let hs: Vec<Morphism> = Cube::hom(m, n).iter().map(yoneda_morphism::<Cube>).collect();
            let (c1, c2) = (representable::<Cube>(m).presheaf, representable::<Cube>(n).presheaf);
            let tag = |e: Error| Error::Violation(format!("□[{m}]→□[{n}]: {e}"));
            upsilon_naturality(&hs, &c1, &c2, budget).map_err(tag)?;
            zeta_naturality(&hs, &c1, &c2, budget).map_err(tag)?;
            count += hs.len();
        }
    }
    Ok(count)
}

/// A natural □[n] → ex □[n] is fixed by its vertices: exactly one cubical
/// function agrees with υ there.
pub fn upsilon_unique(n: usize, budget: CoendBudget) -> Result<()> {
    let rep = representable::<Cube>(n).presheaf;
    let e = ex(&rep, budget)?;
    let u = upsilon(&rep, &e)?;
    let pinned = rep.cells(0).map(|v| (v, u.image(v))).collect();
    let opts = SearchOptions { pinned, ..Default::default() };
    let all = enumerate_morphisms(&rep, &e.presheaf, &opts)?;
    if all != vec![u] {
        return Err(Error::Violation(format!("{} cubical functions □[{n}] → ex □[{n}] agree with υ on vertices", all.len())));
    }
    Ok(())
}

/// Homotopy classes of maps □[1] → □[1].
pub fn interval_self_map_classes() -> Result<usize> {
    let i = Diagram::single(representable::<Cube>(1).presheaf);
    Ok(homotopy_graph(&i, &i, &[], 1_000_000)?.class_count())
}

/// Class counts of corner-to-corner dipaths on the square annulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusClasses {
    /// Pair-shaped maps path(len) → ex(annulus), ∂ fixed.
    pub ex_nodes: usize,
    pub ex_classes: usize,
    /// The same with simplicial prisms into tri(annulus).
    pub tri_nodes: usize,
    pub tri_classes: usize,
    /// Cubical cylinders straight into the annulus (no connections).
    pub literal_classes: usize,
}

pub fn annulus_classes(budget: CoendBudget, len: usize) -> Result<AnnulusClasses> {
    let a = square_annulus();
    let (start, end) = (grid_vertex(3, 0, 0), grid_vertex(3, 3, 3));
    let e = ex(&a, budget)?;
    let u = upsilon(&a, &e)?;
    let ev = |v: usize| u.image(CellId::new(0, v)).base.idx;
    let (src, tgt, id) = pair_dipath::<Cube>(&e.presheaf, ev(start), ev(end), len)?;
    let ge = homotopy_graph(&src, &tgt, &[(0, id)], 50_000_000)?;
    let t = tri(&a);
    let (src, tgt, id) = pair_dipath::<Simplex>(t.presheaf(), tri_vertex(&t, start), tri_vertex(&t, end), len)?;
    let gt = homotopy_graph(&src, &tgt, &[(0, id)], 50_000_000)?;
    let (src, tgt, id) = pair_dipath::<Cube>(&a, start, end, len)?;
    let gl = homotopy_graph(&src, &tgt, &[(0, id)], 50_000_000)?;
    Ok(AnnulusClasses {
        ex_nodes: ge.nodes.len(),
        ex_classes: ge.class_count(),
        tri_nodes: gt.nodes.len(),
        tri_classes: gt.class_count(),
        literal_classes: gl.class_count(),
    })
}

/// Outcome of the randomized approximation trial on the annulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DipathTrial {
    pub samples: usize,
    /// Samples whose approximation landed in the class of their lattice path.
    pub matched: usize,
    /// Samples per homotopy class of the lattice path.
    pub per_class: Vec<usize>,
    /// Subdivision depth used per sample.
    pub depths: Vec<usize>,
}

/// Samples PL dipaths through tri(annulus), approximates each, and compares
/// the class of the approximation with that of the lattice path it follows.
pub fn annulus_dipath_trial(seed: u64, samples: usize, cap: usize) -> Result<DipathTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = square_annulus();
    let t = tri(&a);
    let x = t.presheaf();
    let (src, tgt, id) = pair_dipath::<Simplex>(x, tri_vertex(&t, 0), tri_vertex(&t, grid_vertex(3, 3, 3)), 6)?;
    let g = homotopy_graph(&src, &tgt, &[(0, id.clone())], 50_000_000)?;
    let labels = g.classes();
    let class_of = |vs: &[usize]| -> Result<usize> {
        let m = path_morphism(x, &without_stops(vs), 6)?;
        let i = g.node_index(&vec![id.clone(), m]).ok_or_else(|| Error::Violation("path is not a dipath between the corners".into()))?;
        Ok(labels[i])
    };
    let mut trial = DipathTrial { samples, matched: 0, per_class: vec![0; g.class_count()], depths: Vec::new() };
    for _ in 0..samples {
        let d = random_annulus_dipath(&mut rng, 3)?;
        if !crate::approx::star_condition(&d.map).holds() && cap == 0 {
            return Err(Error::Budget("star condition fails without subdivision".into()));
        }
        let s = simplicial_approximation(&d.map, cap)?;
        s.psi.check(s.tower.top(), x)?;
        let walk = path_walk(s.tower.top())?;
        let vs: Vec<usize> = walk.iter().map(|&v| s.psi.image(CellId::new(0, v)).base.idx).collect();
        let (got, want) = (class_of(&vs)?, class_of(&d.lattice)?);
        trial.per_class[want] += 1;
        trial.matched += usize::from(got == want);
        trial.depths.push(s.k);
    }
    Ok(trial)
}

/// A random point of |Δ[n]|: a random face as support, with either dyadic
/// weights (so ties occur) or continuous ones.
pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let dyadic = rng.gen_bool(0.5);
        let w: Vec<f64> = (0..=n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else if dyadic {
                    rng.gen_range(1..=4) as f64
                } else {
                    rng.gen_range(0.001..1.0)
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.iter().map(|x| x / s).collect();
        }
    }
}

/// min supp x ≤ min supp y for sampled x ≤ y in |Δ[n]|. Pairs are built as
/// (x, x ∨ z) and (x ∧ z, x). Returns the number of violations.
pub fn min_support_monotonicity(seed: u64, n: usize, pairs: usize) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for i in 0..pairs {
        let (x, z) = (random_point(&mut rng, n), random_point(&mut rng, n));
        let (lo, hi) = if i % 2 == 0 { (x.clone(), simplex_join(&x, &z)?) } else { (simplex_meet(&x, &z)?, x) };
        if !simplex_leq(&lo, &hi)? {
            return Err(Error::Violation(format!("{lo:?} ≰ {hi:?}")));
        }
        if min_position(&lo) > min_position(&hi) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Idempotence, commutativity, associativity, absorption and
/// x ≤ y ⇔ x∨y = y ⇔ x∧y = x on sampled triples. Returns the failures.
pub fn lattice_laws<T: Scalar>(triples: &[(Vec<T>, Vec<T>, Vec<T>)]) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let mut law = |ok: bool, name: &str, i: usize| {
        if !ok {
            bad.push(format!("{name} fails on triple {i}"));
        }
    };
    for (i, (x, y, z)) in triples.iter().enumerate() {
        let (j, m) = (simplex_join(x, y)?, simplex_meet(x, y)?);
        law(approx_eq(&simplex_join(x, x)?, x) && approx_eq(&simplex_meet(x, x)?, x), "idempotence", i);
        law(approx_eq(&j, &simplex_join(y, x)?) && approx_eq(&m, &simplex_meet(y, x)?), "commutativity", i);
        law(
            approx_eq(&simplex_join(&j, z)?, &simplex_join(x, &simplex_join(y, z)?)?)
                && approx_eq(&simplex_meet(&m, z)?, &simplex_meet(x, &simplex_meet(y, z)?)?),
            "associativity",
            i,
        );
        law(approx_eq(&simplex_join(x, &m)?, x) && approx_eq(&simplex_meet(x, &j)?, x), "absorption", i);
        let leq = simplex_leq(x, y)?;
        law(leq == approx_eq(&j, y) && leq == approx_eq(&m, x), "order equivalence", i);
        // a comparable pair built from the triple
        let w = simplex_join(x, z)?;
        law(
            simplex_leq(x, &w)? && approx_eq(&simplex_join(x, &w)?, &w) && approx_eq(&simplex_meet(x, &w)?, x),
            "order equivalence (comparable)",
            i,
        );
    }
    Ok(bad)
}

pub fn random_triples(seed: u64, n: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_point(&mut rng, n), random_point(&mut rng, n), random_point(&mut rng, n))).collect()
}

fn case(name: impl Into<String>, f: impl Fn() -> Result<String> + Send + Sync + 'static) -> Case {
    (name.into(), Box::new(f))
}

fn cases(suite: &str, seed: u64) -> Result<Vec<Case>> {
    let mut out: Vec<Case> = Vec::new();
    match suite {
        "cd_fold" => {
            for (name, c) in cube_fixtures() {
                out.push(case(name, move || fold_check(&c).map(|(a, v)| format!("{a} atomic subpresheaves, {v} vertices"))));
            }
            out.push(case("Δ[1]", || {
                fold_check(&representable::<Simplex>(1).presheaf).map(|(a, v)| format!("{a} atomic subpresheaves, {v} vertices"))
            }));
        }
        "sd_cd_tri" => {
            for (name, c) in cube_fixtures() {
                out.push(case(name, move || {
                    let cmp = sd_tri_comparison(&c)?;
                    cmp.verify(&c)?;
                    Ok(format!("tri sd ≅ sd tri with {:?} cells", cmp.tri_sd.presheaf().counts()))
                }));
            }
        }
        "qt" => {
            for (name, c) in cube_fixtures().into_iter().filter(|(n, _)| *n != "□[0]") {
                out.push(case(name, move || qt_colimit_check(&c, 2).map(|w| format!("levels {:?}", w.qua_levels))));
            }
        }
        "graph_nerves" => {
            for n in 1..=3 {
                out.push(case(format!("preorders on {n} points"), move || {
                    let ps = Preorder::all_on(n);
                    for p in &ps {
                        graph_nerve_check(p, 2)?;
                    }
                    Ok(format!("{} preorders", ps.len()))
                }));
            }
        }
        "convex_nerves" => {
            out.push(case("[0], [1], ⟦2⟧", || {
                let mut cells = 0;
                for p in [Preorder::chain(0), Preorder::chain(1), Shape::cube(2).preorder()] {
                    cells += convex_nerve_check(&p, 1)?;
                }
                Ok(format!("{cells} cells"))
            }));
            out.push(case("meet semilattices on 3 points", || {
                let ps: Vec<Preorder> = Preorder::all_on(3).into_iter().filter(|p| p.is_meet_semilattice()).collect();
                for p in &ps {
                    convex_nerve_check(p, 1)?;
                }
                Ok(format!("{} semilattices", ps.len()))
            }));
        }
        "cx_unit" => {
            for n in 0..=2 {
                out.push(case(format!("υ on □[{n}] fixed by vertices"), move || upsilon_unique(n, EX_BUDGET).map(|_| "unique".into())));
            }
            for n in 1..=4 {
                out.push(case(format!("μ∘υ = id, preorders on {n} point{}", if n == 1 { "" } else { "s" }), move || {
                    let ps = Preorder::all_up_to_iso(n);
                    for p in &ps {
                        nerve_composition(p, EX_BUDGET)?.verify()?;
                    }
                    Ok(format!("{} preorders up to isomorphism", ps.len()))
                }));
            }
            out.push(case("υ and ζ naturality on representable maps", || {
                representable_naturality(EX_BUDGET).map(|n| format!("{n} maps"))
            }));
            out.push(case("naturality on maps out of glued intervals", glued_interval_naturality));
        }
        "ex_representables" => {
            for n in 0..=2 {
                out.push(case(format!("ex □[{n}] ≅ ner^□[{n}]"), move || {
                    ex_representable_check(n, EX_BUDGET).map(|(a, b)| format!("nerve {a:?}, ex {b:?}"))
                }));
            }
        }
        "classes" => {
            out.push(case("□[1] → □[1]", || match interval_self_map_classes()? {
                2 => Ok("2 classes".into()),
                k => Err(Error::Violation(format!("{k} classes"))),
            }));
            out.push(case("annulus corner dipaths", || {
                let r = annulus_classes(CoendBudget { max_size: 2, max_dim: 2 }, 6)?;
                if r.ex_classes != 2 || r.tri_classes != 2 {
                    return Err(Error::Violation(format!("{r:?}")));
                }
                Ok(format!(
                    "ex: {} maps, 2 classes; tri: {} maps, 2 classes; without connections: {} classes",
                    r.ex_nodes, r.tri_nodes, r.literal_classes
                ))
            }));
        }
        "approximation" => {
            out.push(case("annulus dipaths", move || {
                let t = annulus_dipath_trial(seed, 20, 6)?;
                if t.matched != t.samples {
                    return Err(Error::Violation(format!("{} of {} approximations change class", t.samples - t.matched, t.samples)));
                }
                Ok(format!("{} samples, classes {:?}", t.samples, t.per_class))
            }));
            for n in 1..=3 {
                out.push(case(format!("min-support monotonicity, n = {n}"), move || match min_support_monotonicity(seed + n as u64, n, 10_000)? {
                    0 => Ok("10000 pairs".into()),
                    k => Err(Error::Violation(format!("{k} violations"))),
                }));
            }
        }
        "lattice" => {
            for n in 1..=3 {
                out.push(case(format!("join/meet laws, n = {n}"), move || {
                    let bad = lattice_laws(&random_triples(seed + 100 + n as u64, n, 10_000))?;
                    match bad.first() {
                        None => Ok("10000 triples".into()),
                        Some(b) => Err(Error::Violation(format!("{} failures, first: {b}", bad.len()))),
                    }
                }));
            }
        }
        other => return Err(Error::Invalid(format!("unknown suite \"{other}\""))),
    }
    Ok(out)
}

/// Runs a named suite, or every suite in [`SUITES`] for `all`.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CaseReport>> {
    if name == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run_suite(s, seed)?);
        }
        return Ok(out);
    }
    let cs = cases(name, seed)?;
    let results: Vec<Result<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cs.iter().map(|(_, f)| scope.spawn(f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Violation("case panicked".into()))))
            .collect()
    });
    Ok(cs
        .iter()
        .zip(results)
        .map(|((case, _), r)| CaseReport {
            suite: name.into(),
            case: case.clone(),
            pass: r.is_ok(),
            detail: r.unwrap_or_else(|e| e.to_string()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yoneda_morphisms_verify() {
        for (name, m, n, h) in representable_morphisms() {
            assert!(h.verify(&representable::<Cube>(m).presheaf, &representable::<Cube>(n).presheaf), "{name}");
        }
    }

    #[test]
    fn dyadic_samples_tie() {
        let t = random_triples(3, 2, 200);
        assert!(t.iter().any(|(x, y, _)| approx_eq(x, y)) || t.iter().any(|(x, _, _)| x.contains(&0.0)));
        assert!(lattice_laws(&t).unwrap().is_empty());
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", 0), Err(Error::Invalid(_))));
    }

}
