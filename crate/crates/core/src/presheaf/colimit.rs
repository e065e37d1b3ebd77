//! Cocontinuous extension of a functor defined on representables.
//!
//! Given F on the objects and maps of a site, the extension to a presheaf B is
//! the colimit of F over the cells of B: the disjoint union of F(dim σ) over
//! nondegenerate σ, glued along σ·δ = τ·s by identifying F(δ)y with F(s)y.
//! Elementary faces generate all the needed relations.

use super::{from_levels, Cell, CellId, LevelBuild, Morphism, Presheaf};
use crate::site::Site;
use std::collections::HashMap;
use std::hash::Hash;

/// A functor from the site `S` into presheaves over `T`, given on representables.
pub trait RepFunctor<S: Site, T: Site> {
    fn obj(&self, n: usize) -> &Presheaf<T>;
    fn map(&self, f: &S::Map) -> Morphism;
}

/// The common case: F(n) is built from explicit values and F(f) is a
/// value-level post-composition.
pub struct LevelFunctor<S: Site, T: Site, V> {
    pub builds: Vec<LevelBuild<T, V>>,
    post: Box<dyn Fn(&S::Map, &V) -> V + Send + Sync>,
}

impl<S: Site, T: Site, V: Clone + Eq + Hash + std::fmt::Debug> LevelFunctor<S, T, V> {
    pub fn new(builds: Vec<LevelBuild<T, V>>, post: impl Fn(&S::Map, &V) -> V + Send + Sync + 'static) -> Self {
        LevelFunctor { builds, post: Box::new(post) }
    }
    pub fn value_of(&self, n: usize, y: Cell, act: impl Fn(&V, &T::Map) -> V) -> V {
        let v = self.builds[n].value(y.base);
        act(v, &T::surj_from_code(y.level, y.code))
    }
}

impl<S: Site, T: Site, V: Clone + Eq + Hash + std::fmt::Debug> RepFunctor<S, T> for LevelFunctor<S, T, V> {
    fn obj(&self, n: usize) -> &Presheaf<T> {
        &self.builds[n].presheaf
    }
    fn map(&self, f: &S::Map) -> Morphism {
        let (src, tgt) = (&self.builds[S::dom(f)], &self.builds[S::cod(f)]);
        let images = src
            .nondeg
            .iter()
            .take(src.presheaf.top() + 1)
            .enumerate()
            .map(|(k, l)| {
                l.iter()
                    .map(|v| {
                        let w = (self.post)(f, v);
                        tgt.cell(k, &w).unwrap_or_else(|| panic!("F(f) leaves its codomain at level {k}: {w:?}"))
                    })
                    .collect()
            })
            .collect();
        Morphism { images }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// The extension of F to a presheaf `base`, with the bookkeeping needed to
/// name its cells as classes of pairs (σ, y).
#[derive(Clone, Debug)]
pub struct Extension<T: Site> {
    pub presheaf: Presheaf<T>,
    /// Level k: class of each pair (σ nondegenerate in the base, y a level-k cell of F(dim σ)).
    class_of: Vec<HashMap<(CellId, Cell), usize>>,
    /// Level k: a representative pair per class.
    reps: Vec<Vec<(CellId, Cell)>>,
    /// Level k: the lowest-dimensional σ appearing in each class.
    carriers: Vec<Vec<CellId>>,
    /// Level k: normal cell of each class.
    class_cell: Vec<Vec<Cell>>,
    /// Nondegenerate output cell → class at its own level.
    nd_class: Vec<Vec<usize>>,
}

/// A truncated base is read as its skeleton: only its stored cells are glued,
/// so the result is a genuine presheaf.
pub fn extend<S: Site, T: Site, F: RepFunctor<S, T>>(base: &Presheaf<S>, f: &F) -> Extension<T> {
    let mut top = 0;
    let mut trunc = None;
    for n in 0..=base.top() {
        if base.count(n) > 0 {
            top = top.max(f.obj(n).top());
            if let Some(t) = f.obj(n).truncation() {
                trunc = Some(trunc.map_or(t, |u: usize| u.min(t)));
            }
        }
    }
    if let Some(t) = trunc {
        top = top.min(t);
    }
    // relation data per face: (σ, F(δ_i), τ, F(s))
    let mut glue: Vec<(CellId, Morphism, CellId, Morphism, usize)> = Vec::new();
    for n in 1..=base.top() {
        for sigma in base.cells(n) {
            for i in 0..S::face_count(n) {
                let fc = base.face(sigma, i);
                let s = S::surj_from_code(fc.level, fc.code);
                glue.push((sigma, f.map(&S::face(n, i)), fc.base, f.map(&s), n - 1));
            }
        }
    }
    let mut class_of = Vec::with_capacity(top + 1);
    let mut reps = Vec::with_capacity(top + 1);
    let mut carriers = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut ids: HashMap<(CellId, Cell), usize> = HashMap::new();
        let mut elems: Vec<(CellId, Cell)> = Vec::new();
        for n in 0..=base.top() {
            if base.count(n) == 0 {
                continue;
            }
            let lvl = f.obj(n).level(k);
            for sigma in base.cells(n) {
                for &y in &lvl {
                    ids.insert((sigma, y), elems.len());
                    elems.push((sigma, y));
                }
            }
        }
        let mut uf = UnionFind((0..elems.len()).collect());
        for (sigma, fd, tau, fs, m) in &glue {
            let objm = f.obj(*m);
            for y in objm.level(k) {
                let a = (*sigma, fd.apply(f.obj(sigma.dim), y));
                let b = (*tau, fs.apply(f.obj(tau.dim), y));
                uf.union(ids[&a], ids[&b]);
            }
        }
        let mut root_class: HashMap<usize, usize> = HashMap::new();
        let mut rep_k = Vec::new();
        let mut car_k: Vec<CellId> = Vec::new();
        let mut cls: HashMap<(CellId, Cell), usize> = HashMap::with_capacity(elems.len());
        for (e, &pair) in elems.iter().enumerate() {
            let r = uf.find(e);
            let c = *root_class.entry(r).or_insert_with(|| {
                rep_k.push(pair);
                car_k.push(pair.0);
                rep_k.len() - 1
            });
            if pair.0.dim < car_k[c].dim {
                car_k[c] = pair.0;
            }
            cls.insert(pair, c);
        }
        class_of.push(cls);
        reps.push(rep_k);
        carriers.push(car_k);
    }
    let levels: Vec<Vec<usize>> = reps.iter().map(|r| (0..r.len()).collect()).collect();
    let lb = from_levels::<T, usize, _>(
        levels,
        |k, &c, g| {
            let (sigma, y) = reps[k][c];
            let y2 = f.obj(sigma.dim).act(y, g);
            class_of[T::dom(g)][&(sigma, y2)]
        },
        trunc,
    );
    let class_cell: Vec<Vec<Cell>> =
        (0..=top).map(|k| (0..reps[k].len()).map(|c| lb.normal[k][&c]).collect()).collect();
    let nd_class = lb.nondeg.clone();
    Extension { presheaf: lb.presheaf, class_of, reps, carriers, class_cell, nd_class }
}

impl<T: Site> Extension<T> {
    /// The cell named by (σ, y) for a nondegenerate σ.
    pub fn cell_nd(&self, sigma: CellId, y: Cell) -> Cell {
        if y.level < self.class_of.len() {
            return self.class_cell[y.level][self.class_of[y.level][&(sigma, y)]];
        }
        // above the computed levels y is degenerate; name its base and degenerate
        let base = self.cell_nd(sigma, Cell::nd(y.base));
        self.presheaf.act(base, &T::surj_from_code(y.level, y.code))
    }

    /// The cell named by (σ, y) for any cell σ of the base.
    pub fn cell_of<S: Site, F: RepFunctor<S, T>>(&self, f: &F, sigma: Cell, y: Cell) -> Cell {
        if sigma.code == 0 {
            return self.cell_nd(sigma.base, y);
        }
        let s = S::surj_from_code(sigma.level, sigma.code);
        let y2 = f.map(&s).apply(f.obj(sigma.base.dim), y);
        self.cell_nd(sigma.base, y2)
    }

    /// A representative pair of a nondegenerate output cell.
    pub fn rep(&self, c: CellId) -> (CellId, Cell) {
        self.reps[c.dim][self.nd_class[c.dim][c.idx]]
    }

    /// The lowest-dimensional base cell whose copy contains `c`.
    pub fn carrier(&self, c: CellId) -> CellId {
        self.carriers[c.dim][self.nd_class[c.dim][c.idx]]
    }

    /// Number of classes at each computed level.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.reps.iter().map(|r| r.len()).collect()
    }
}

/// The map F(B) → F(B') induced by h: B → B'.
pub fn extend_morphism<S: Site, T: Site, F: RepFunctor<S, T>>(
    h: &Morphism,
    src: &Extension<T>,
    tgt: &Extension<T>,
    f: &F,
) -> Morphism {
    let images = (0..=src.presheaf.top())
        .map(|d| {
            src.presheaf
                .cells(d)
                .map(|c| {
                    let (sigma, y) = src.rep(c);
                    tgt.cell_of(f, h.image(sigma), y)
                })
                .collect()
        })
        .collect();
    Morphism { images }
}

/// The map F(B) → G(B) induced by a natural family τ_n: F(n) → G(n).
pub fn extend_nat<T: Site>(src: &Extension<T>, tgt: &Extension<T>, tau: impl Fn(usize, Cell) -> Cell) -> Morphism {
    let images = (0..=src.presheaf.top())
        .map(|d| {
            src.presheaf
                .cells(d)
                .map(|c| {
                    let (sigma, y) = src.rep(c);
                    tgt.cell_nd(sigma, tau(sigma.dim, y))
                })
                .collect()
        })
        .collect();
    Morphism { images }
}
