use std::path::PathBuf;

use dicube::approx::{simplicial_approximation, PLVertexMap};
use dicube::generate::{interval, square_annulus};
use dicube::homotopy::Diagram;
use dicube::io::{load_any_complex, load_complex, load_diagram, load_pl_map, save_complex, save_diagram, save_pl_map};
use dicube::order::Preorder;
use dicube::presheaf::representable;
use dicube::site::{Cube, Simplex};
use dicube::triangulation::nerve_cubical;
use dicube::Rational;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn representables() {
    for n in 0..=3 {
        let cube: dicube::presheaf::Presheaf<Cube> = load_complex(&read(&format!("representables/cube_{n}.json"))).unwrap();
        // faces of the n-cube: C(n, k) 2^(n-k) of dimension k
        let want: Vec<usize> = (0..=n).map(|k| binomial(n, k) << (n - k)).collect();
        assert_eq!(cube.counts(), want);
        assert_eq!(save_complex(&cube), save_complex(&representable::<Cube>(n).presheaf));
        let simplex: dicube::presheaf::Presheaf<Simplex> = load_complex(&read(&format!("representables/simplex_{n}.json"))).unwrap();
        assert_eq!(simplex.counts(), (0..=n).map(|k| binomial(n + 1, k + 1)).collect::<Vec<_>>());
    }
}

#[test]
fn intervals() {
    for k in 0..=3 {
        let c: dicube::presheaf::Presheaf<Cube> = load_complex(&read(&format!("intervals/cube_sd{k}.json"))).unwrap();
        assert_eq!(c.counts(), vec![(1 << k) + 1, 1 << k]);
        assert_eq!(save_complex(&c), save_complex(&interval::<Cube>(k)));
        let s: dicube::presheaf::Presheaf<Simplex> = load_complex(&read(&format!("intervals/simplex_sd{k}.json"))).unwrap();
        assert_eq!(s.counts(), vec![(1 << k) + 1, 1 << k]);
    }
}

#[test]
fn annulus_and_its_dipaths() {
    let a: dicube::presheaf::Presheaf<Cube> = load_complex(&read("annulus.json")).unwrap();
    assert_eq!(a.counts(), vec![16, 24, 8]);
    assert_eq!(save_complex(&a), save_complex(&square_annulus()));
    for side in ["source", "target"] {
        let text = read(&format!("annulus_dipath_{side}.json"));
        let d: Diagram<Cube> = load_diagram(&text).unwrap();
        assert_eq!(save_diagram(&d), text);
        assert_eq!(d.values[0].counts(), vec![2]);
    }
    let text = read("annulus_random_dipath.json");
    let f: PLVertexMap<Simplex, Rational> = load_pl_map(&text).unwrap();
    assert_eq!(save_pl_map(&f), text);
    let s = simplicial_approximation(&f, 6).unwrap();
    assert!(s.psi.verify(s.tower.top(), &f.target));
}

#[test]
fn preorder_nerves() {
    for (points, count) in [(1, 1), (2, 3), (3, 9), (4, 33)] {
        let ps = Preorder::all_up_to_iso(points);
        assert_eq!(ps.len(), count);
        for (i, p) in ps.iter().enumerate() {
            let text = read(&format!("nerves/p{points}_{i}.json"));
            let c: dicube::presheaf::Presheaf<Cube> = load_complex(&text).unwrap();
            assert_eq!(save_complex(&c), text);
            assert_eq!(text, save_complex(&nerve_cubical(p, 2).presheaf));
            let strict = (0..points).flat_map(|a| (0..points).map(move |b| (a, b))).filter(|&(a, b)| a != b && p.le(a, b)).count();
            assert_eq!(c.count(0), points);
            assert_eq!(c.counts().get(1).copied().unwrap_or(0), strict);
        }
    }
}

#[test]
fn every_complex_file_round_trips() {
    let mut seen = 0;
    for sub in ["representables", "intervals", "nerves"] {
        for entry in std::fs::read_dir(dir().join(sub)).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            assert_eq!(load_any_complex(&text).unwrap().save(), text);
            seen += 1;
        }
    }
    assert_eq!(seen, 16 + 46);
}
