use dicube::approx::{min_position, simplex_join, simplex_leq, simplex_meet};
use dicube::generate::{grid, grid_minus, path};
use dicube::io::{load_complex, save_complex};
use dicube::order::Preorder;
use dicube::presheaf::{representable, Presheaf, Tensor};
use dicube::site::{Cube, Simplex};
use dicube::subdivision::{sd_cubical, Subdivision, Tower};
use dicube::triangulation::{nerve_cubical, sd_tri_comparison, tri};
use dicube::Rational;
use proptest::prelude::*;

fn exact_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..5, n + 1).prop_filter("some weight", |w| w.iter().any(|&x| x > 0)).prop_map(|w| {
        let s: i64 = w.iter().sum();
        w.into_iter().map(|x| Rational::new(x, s)).collect()
    })
}

fn float_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.001f64..1.0], n + 1)
        .prop_filter("some weight", |w| w.iter().any(|&x| x > 0.0))
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
}

fn exact_triple() -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>, Vec<Rational>)> {
    (1usize..4).prop_flat_map(|n| (exact_point(n), exact_point(n), exact_point(n)))
}

fn close(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| (a - b).abs() < 1e-9)
}

// u ≤ v when every final segment of vertices weighs at least as much in v
fn leq_oracle(u: &[Rational], v: &[Rational]) -> bool {
    (0..u.len()).all(|k| u[k..].iter().sum::<Rational>() <= v[k..].iter().sum::<Rational>())
}

proptest! {
    #[test]
    fn join_is_least_upper_bound((x, y, w) in exact_triple()) {
        let j = simplex_join(&x, &y).unwrap();
        let m = simplex_meet(&x, &y).unwrap();
        prop_assert!(leq_oracle(&x, &j) && leq_oracle(&y, &j));
        prop_assert!(leq_oracle(&m, &x) && leq_oracle(&m, &y));
        if leq_oracle(&x, &w) && leq_oracle(&y, &w) {
            prop_assert!(leq_oracle(&j, &w));
        }
        if leq_oracle(&w, &x) && leq_oracle(&w, &y) {
            prop_assert!(leq_oracle(&w, &m));
        }
        prop_assert_eq!(simplex_leq(&x, &y).unwrap(), leq_oracle(&x, &y));
    }

    #[test]
    fn exact_lattice_laws((x, y, z) in exact_triple()) {
        let j = |a: &[Rational], b: &[Rational]| simplex_join(a, b).unwrap();
        let m = |a: &[Rational], b: &[Rational]| simplex_meet(a, b).unwrap();
        prop_assert_eq!(j(&x, &x), x.clone());
        prop_assert_eq!(j(&x, &y), j(&y, &x));
        prop_assert_eq!(j(&j(&x, &y), &z), j(&x, &j(&y, &z)));
        prop_assert_eq!(m(&m(&x, &y), &z), m(&x, &m(&y, &z)));
        prop_assert_eq!(j(&x, &m(&x, &y)), x.clone());
        prop_assert_eq!(m(&x, &j(&x, &y)), x.clone());
        prop_assert_eq!(leq_oracle(&x, &y), j(&x, &y) == y);
    }

    #[test]
    fn float_lattice_laws((x, y, z) in (1usize..4).prop_flat_map(|n| (float_point(n), float_point(n), float_point(n)))) {
        let j = |a: &[f64], b: &[f64]| simplex_join(a, b).unwrap();
        let m = |a: &[f64], b: &[f64]| simplex_meet(a, b).unwrap();
        prop_assert!(close(&j(&x, &y), &j(&y, &x)));
        prop_assert!(close(&j(&j(&x, &y), &z), &j(&x, &j(&y, &z))));
        prop_assert!(close(&m(&x, &j(&x, &y)), &x));
        prop_assert!(close(&j(&x, &m(&x, &y)), &x));
    }

    #[test]
    fn min_support_is_monotone((x, y, _) in exact_triple()) {
        let (lo, hi) = (simplex_meet(&x, &y).unwrap(), simplex_join(&x, &y).unwrap());
        prop_assert!(min_position(&lo) <= min_position(&x));
        prop_assert!(min_position(&x) <= min_position(&hi));
    }

    #[test]
    fn complexes_round_trip(m in 1usize..4, n in 1usize..4, holes in prop::collection::vec((0usize..3, 0usize..3), 0..3)) {
        let holes: Vec<_> = holes.into_iter().filter(|&(i, j)| i < m && j < n).collect();
        let c = grid_minus(m, n, &holes).unwrap();
        let text = save_complex(&c);
        let back: Presheaf<Cube> = load_complex(&text).unwrap();
        prop_assert_eq!(save_complex(&back), text);
        let mut distinct = holes.clone();
        distinct.sort();
        distinct.dedup();
        let mut want = vec![(m + 1) * (n + 1), m * (n + 1) + n * (m + 1), m * n - distinct.len()];
        if want[2] == 0 {
            want.pop();
        }
        prop_assert_eq!(back.counts(), want);
    }

    #[test]
    fn nerves_round_trip(rel in prop::collection::vec((0usize..4, 0usize..4), 0..6)) {
        let p = Preorder::from_relations(4, &rel);
        let nerve = nerve_cubical(&p, 2).presheaf;
        let text = save_complex(&nerve);
        prop_assert_eq!(save_complex(&load_complex::<Cube>(&text).unwrap()), text);
        // nondegenerate edges are the strict comparabilities a ≤ b, a ≠ b
        let pairs = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).filter(|&(a, b)| a != b && p.le(a, b)).count();
        prop_assert_eq!(nerve.count(1), pairs);
    }

    #[test]
    fn tensor_counts_convolve(a in 0usize..4, b in 1usize..4, c in 0usize..3) {
        let left = if a == 0 { representable::<Cube>(1).presheaf } else { path::<Cube>(a) };
        let right = grid(b, 1 + c).presheaf;
        let t = Tensor::new(&left, &right).presheaf;
        let (l, r) = (left.counts(), right.counts());
        let mut want = vec![0usize; l.len() + r.len() - 1];
        for (i, x) in l.iter().enumerate() {
            for (j, y) in r.iter().enumerate() {
                want[i + j] += x * y;
            }
        }
        prop_assert_eq!(t.counts(), want);
    }

    #[test]
    fn subdivision_doubles_grids(m in 1usize..4, n in 1usize..4) {
        let g = grid(m, n).presheaf;
        prop_assert_eq!(sd_cubical(&g).presheaf().counts(), grid(2 * m, 2 * n).presheaf.counts());
        let k = 2;
        let verts = Tower::new(&path::<Simplex>(m), k).top().count(0);
        prop_assert_eq!(verts, m * (1 << k) + 1);
    }

    #[test]
    fn triangulated_grids(m in 1usize..4, n in 1usize..3) {
        let g = grid(m, n).presheaf;
        let t = tri(&g);
        let edges = m * (n + 1) + n * (m + 1);
        prop_assert_eq!(t.presheaf().counts(), vec![(m + 1) * (n + 1), edges + m * n, 2 * m * n]);
        let cmp = sd_tri_comparison(&g).unwrap();
        prop_assert!(cmp.verify(&g).is_ok());
    }
}
