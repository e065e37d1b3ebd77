//! The nine acceptance criteria, each against its stated limits. One line per
//! criterion goes to stderr.

use std::io::Write;
use std::time::{Duration, Instant};

use dicube::approx::{min_position, simplex_join, simplex_leq, simplex_meet};
use dicube::extension::{ex_representable_check, nerve_composition, CoendBudget};
use dicube::order::Preorder;
use dicube::presheaf::{representable, Presheaf};
use dicube::site::Cube;
use dicube::triangulation::{graph_nerve_check, qt_colimit_check, sd_tri_comparison, tri};
use dicube::verify::{
    annulus_classes, annulus_dipath_trial, cube_fixtures, fold_check, interval_self_map_classes, lattice_laws, random_triples,
    glued_interval_naturality, random_point, representable_naturality, EX_BUDGET,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20261018;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn fixture(name: &str) -> Presheaf<Cube> {
    cube_fixtures().into_iter().find(|(n, _)| *n == name).expect("known fixture").1
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// strict chains v₀ < … < v_k in the subsets of n coordinates
fn boolean_chains(n: usize, k: usize) -> usize {
    fn extend(n: usize, last: u32, left: usize) -> usize {
        if left == 0 {
            return 1;
        }
        (0u32..1 << n).filter(|&v| v != last && v & last == last).map(|v| extend(n, v, left - 1)).sum()
    }
    (0u32..1 << n).map(|v| extend(n, v, k)).sum()
}

fn triangulation() -> Outcome {
    let mut tops = Vec::new();
    for n in 1..=4 {
        let t = tri(&representable::<Cube>(n).presheaf);
        let counts = t.presheaf().counts();
        let factorial: usize = (1..=n).product();
        if counts.len() != n + 1 || counts[n] != factorial {
            return Err(format!("tri □⟦{n}⟧ has counts {counts:?}, want {factorial} top simplices"));
        }
        let chains: Vec<usize> = (0..=n).map(|k| boolean_chains(n, k)).collect();
        if counts != chains {
            return Err(format!("tri □⟦{n}⟧ has counts {counts:?}, chain count {chains:?}"));
        }
        tops.push(counts[n]);
    }
    Ok(format!("top simplices {tops:?}"))
}

fn subdivision_comparison() -> Outcome {
    let mut done = Vec::new();
    for name in ["□[0]", "□[1]", "□⟦2⟧", "annulus"] {
        let c = fixture(name);
        let cmp = sd_tri_comparison(&c).map_err(err)?;
        cmp.verify(&c).map_err(|e| format!("{name}: {e}"))?;
        done.push(format!("{name} {:?}", cmp.tri_sd.presheaf().counts()));
    }
    Ok(done.join(", "))
}

fn adjoint_formula() -> Outcome {
    let mut done = Vec::new();
    for name in ["□[1]", "□⟦2⟧", "glued intervals", "annulus"] {
        let w = qt_colimit_check(&fixture(name), 2).map_err(|e| format!("{name}: {e}"))?;
        if w.qua_levels != w.colimit_levels {
            return Err(format!("{name}: qua {:?}, colimit {:?}", w.qua_levels, w.colimit_levels));
        }
        done.push(format!("{name} {:?}", w.qua_levels));
    }
    Ok(done.join(", "))
}

fn folding() -> Outcome {
    let (mut atoms, mut vertices) = (0, 0);
    for (name, c) in cube_fixtures() {
        let (a, v) = fold_check(&c).map_err(|e| format!("{name}: {e}"))?;
        atoms += a;
        vertices += v;
    }
    Ok(format!("{atoms} atomic subpresheaves, {vertices} vertex stars"))
}

fn extension_laws() -> Outcome {
    let mut failures = Vec::new();
    for n in 0..=2 {
        match ex_representable_check(n, EX_BUDGET) {
            Ok(_) => {}
            Err(e) => failures.push(format!("ex □⟦{n}⟧: {e}")),
        }
    }
    let mut preorders = 0;
    for n in 1..=4 {
        for p in Preorder::all_up_to_iso(n) {
            if let Err(e) = nerve_composition(&p, EX_BUDGET).and_then(|c| c.verify()) {
                failures.push(format!("μ∘υ on a {n}-point preorder: {e}"));
            }
            preorders += 1;
        }
    }
    let maps = representable_naturality(EX_BUDGET).unwrap_or_else(|e| {
        failures.push(e.to_string());
        0
    });
    let glued = glued_interval_naturality().unwrap_or_else(|e| {
        failures.push(e.to_string());
        String::new()
    });
    if failures.is_empty() {
        Ok(format!("{preorders} preorders up to isomorphism, {maps} representable maps, {glued}"))
    } else {
        Err(failures.join("; "))
    }
}

fn nerve_bijection() -> Outcome {
    let mut count = 0;
    for n in 1..=3 {
        for p in Preorder::all_on(n) {
            graph_nerve_check(&p, 2).map_err(err)?;
            count += 1;
        }
    }
    Ok(format!("{count} labelled preorders"))
}

fn homotopy_classes() -> Outcome {
    let k = interval_self_map_classes().map_err(err)?;
    if k != 2 {
        return Err(format!("□[1] → □[1] has {k} classes"));
    }
    let r = annulus_classes(CoendBudget { max_size: 2, max_dim: 2 }, 6).map_err(err)?;
    if r.ex_classes != 2 || r.tri_classes != 2 {
        return Err(format!("annulus dipaths: {r:?}"));
    }
    Ok(format!(
        "□[1] → □[1]: 2 classes; annulus: 2 classes over {} maps into ex, 2 over {} into tri",
        r.ex_nodes, r.tri_nodes
    ))
}

fn approximation() -> Outcome {
    let t = annulus_dipath_trial(SEED, 20, 6).map_err(err)?;
    if t.matched != t.samples {
        return Err(format!("{} of {} approximations land in the class of their lattice path", t.matched, t.samples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for n in 1..=3 {
        for i in 0..10_000 {
            let (x, z) = (random_point(&mut rng, n), random_point(&mut rng, n));
            let (lo, hi) = if i % 2 == 0 { (x.clone(), simplex_join(&x, &z).map_err(err)?) } else { (simplex_meet(&x, &z).map_err(err)?, x) };
            if !simplex_leq(&lo, &hi).map_err(err)? || min_position(&lo) > min_position(&hi) {
                return Err(format!("min supp fails on {lo:?} ≤ {hi:?}"));
            }
        }
    }
    Ok(format!("{} dipaths matched, classes {:?}, depths ≤ {}; 3×10⁴ ordered pairs", t.matched, t.per_class, t.depths.iter().max().unwrap()))
}

fn lattice() -> Outcome {
    for n in 1..=3 {
        let bad = lattice_laws(&random_triples(SEED + n as u64, n, 10_000)).map_err(err)?;
        if !bad.is_empty() {
            return Err(format!("n = {n}: {}", bad.join(", ")));
        }
    }
    Ok("3×10⁴ triples".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 factorial triangulation", triangulation, Duration::from_secs(10)),
        ("2 subdivision comparison", subdivision_comparison, Duration::from_secs(30)),
        ("3 adjoint formula", adjoint_formula, Duration::from_secs(60)),
        ("4 folding lemmas", folding, Duration::from_secs(300)),
        ("5 extension laws", extension_laws, Duration::from_secs(120)),
        ("6 nerve/graph bijection", nerve_bijection, Duration::MAX),
        ("7 homotopy classification", homotopy_classes, Duration::from_secs(120)),
        ("8 approximation soundness", approximation, Duration::from_secs(300)),
        ("9 lattice numerics", lattice, Duration::MAX),
    ];
    let mut failed = Vec::new();
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let verdict = match outcome {
            Ok(_) if took > limit => Err(format!("took {took:.1?}, limit {limit:?}")),
            v => v,
        };
        // straight to stderr so the lines survive output capture
        let line = match &verdict {
            Ok(d) => format!("criterion {name}: PASS ({took:.2?}) {d}"),
            Err(e) => {
                failed.push(name);
                format!("criterion {name}: FAIL ({took:.2?}) {e}")
            }
        };
        writeln!(std::io::stderr(), "{line}").expect("stderr is writable");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
