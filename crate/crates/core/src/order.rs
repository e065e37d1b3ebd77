//! Finite preorders, products of chains, and the monotone maps between them.
//!
//! `MonotoneMap` is the common currency of Δ, □, ⊞ and 𝒬. The ⊞ hom-sets are
//! produced in closed "wiring" form: every output coordinate is either a
//! constant or a gap-free map of one input coordinate, and the input
//! coordinates used increase strictly. A closure oracle in this module
//! re-derives the same sets from generators for small words.

use crate::error::{Error, Result};
use crate::site::{Coord, Cube, CubeMap, OrdMap, Site};
use std::collections::{BTreeSet, HashSet};

/// A product of finite chains `[f_0] ⊗ [f_1] ⊗ …`. The empty product is the point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape(pub Vec<u32>);

impl Shape {
    pub fn cube(n: usize) -> Shape {
        Shape(vec![1; n])
    }
    pub fn chain(n: u32) -> Shape {
        Shape(vec![n])
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn points(&self) -> usize {
        self.0.iter().map(|&f| f as usize + 1).product()
    }
    /// Coordinates of a point index; coordinate 0 varies fastest.
    pub fn coords(&self, mut idx: usize) -> Vec<u32> {
        let mut c = Vec::with_capacity(self.0.len());
        for &f in &self.0 {
            let r = f as usize + 1;
            c.push((idx % r) as u32);
            idx /= r;
        }
        c
    }
    pub fn index(&self, coords: &[u32]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (&f, &c) in self.0.iter().zip(coords) {
            idx += c as usize * stride;
            stride *= f as usize + 1;
        }
        idx
    }
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.coords(a).iter().zip(self.coords(b)).all(|(x, y)| *x <= y)
    }
    pub fn tensor(&self, other: &Shape) -> Shape {
        Shape(self.0.iter().chain(&other.0).copied().collect())
    }
    pub fn is_box(&self) -> bool {
        self.0.iter().all(|&f| f <= 1)
    }
    pub fn is_boxplus(&self) -> bool {
        self.0.iter().all(|&f| f <= 2)
    }
    pub fn preorder(&self) -> Preorder {
        let n = self.points();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq(a, b);
            }
        }
        Preorder { n, leq }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "[0]");
        }
        let parts: Vec<String> = self.0.iter().map(|x| format!("[{x}]")).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// A finite preorder given by its full relation matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Preorder {
    pub n: usize,
    pub leq: Vec<bool>,
}

impl Preorder {
    /// Reflexive–transitive closure of the given relation pairs.
    pub fn from_relations(n: usize, rel: &[(usize, usize)]) -> Preorder {
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in rel {
            leq[a * n + b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Preorder { n, leq }
    }
    pub fn chain(n: usize) -> Preorder {
        Shape::chain(n as u32).preorder()
    }
    pub fn antichain(n: usize) -> Preorder {
        Preorder::from_relations(n, &[])
    }
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| self.le(i, i))
            && (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(self.le(i, j) && self.le(j, k)) || self.le(i, k))))
    }
    /// Greatest lower bound, if one exists and is unique up to equivalence.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.n).filter(|&c| self.le(c, a) && self.le(c, b)).collect();
        lower.iter().copied().find(|&m| lower.iter().all(|&c| self.le(c, m)))
    }
    pub fn is_meet_semilattice(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.meet(a, b).is_some()))
    }
    /// The preorder of pairs `a ≤ b`, ordered componentwise (the arrow preorder P^[1]).
    pub fn arrows(&self) -> (Preorder, Vec<(usize, usize)>) {
        let pairs: Vec<(usize, usize)> =
            (0..self.n).flat_map(|a| (0..self.n).map(move |b| (a, b))).filter(|&(a, b)| self.le(a, b)).collect();
        let m = pairs.len();
        let mut leq = vec![false; m * m];
        for (i, p) in pairs.iter().enumerate() {
            for (j, q) in pairs.iter().enumerate() {
                leq[i * m + j] = self.le(p.0, q.0) && self.le(p.1, q.1);
            }
        }
        (Preorder { n: m, leq }, pairs)
    }
    /// One preorder from each isomorphism class on `n` points.
    pub fn all_up_to_iso(n: usize) -> Vec<Preorder> {
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for k in 0..n {
            perms = perms
                .into_iter()
                .flat_map(|p| (0..=k).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, k);
                    q
                }))
                .collect();
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in Self::all_on(n) {
            let key = perms
                .iter()
                .map(|s| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| p.le(s[a], s[b])).collect::<Vec<bool>>())
                .min()
                .unwrap_or_default();
            if seen.insert(key) {
                out.push(p);
            }
        }
        out
    }

    /// Every preorder on `n` labelled points (n ≤ 4 is instant).
    pub fn all_on(n: usize) -> Vec<Preorder> {
        let offdiag: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| a != b).collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << offdiag.len()) {
            let rel: Vec<(usize, usize)> =
                offdiag.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p).collect();
            let p = Preorder::from_relations(n, &rel);
            // keep only relations that are already transitively closed
            let closed = offdiag.iter().enumerate().all(|(i, &(a, b))| p.le(a, b) == (mask >> i & 1 == 1));
            if closed && seen.insert(p.leq.clone()) {
                out.push(p);
            }
        }
        out
    }
}

/// All monotone maps between two finite preorders, as value tables.
pub fn monotone_maps(p: &Preorder, q: &Preorder) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut t = vec![0u32; p.n];
    fn rec(i: usize, p: &Preorder, q: &Preorder, t: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == p.n {
            out.push(t.clone());
            return;
        }
        for v in 0..q.n {
            let ok = (0..i).all(|j| {
                (!p.le(j, i) || q.le(t[j] as usize, v)) && (!p.le(i, j) || q.le(v, t[j] as usize))
            });
            if ok {
                t[i] = v as u32;
                rec(i + 1, p, q, t, out);
            }
        }
    }
    if p.n == 0 {
        return vec![vec![]];
    }
    rec(0, p, q, &mut t, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotoneMap {
    pub dom: Shape,
    pub cod: Shape,
    pub table: Vec<u32>,
}

impl MonotoneMap {
    pub fn identity(s: &Shape) -> MonotoneMap {
        MonotoneMap { dom: s.clone(), cod: s.clone(), table: (0..s.points() as u32).collect() }
    }
    pub fn from_coords(dom: &Shape, cod: &Shape, f: impl Fn(&[u32]) -> Vec<u32>) -> MonotoneMap {
        let table = (0..dom.points()).map(|p| cod.index(&f(&dom.coords(p))) as u32).collect();
        MonotoneMap { dom: dom.clone(), cod: cod.clone(), table }
    }
    pub fn apply(&self, p: usize) -> usize {
        self.table[p] as usize
    }
    /// g ∘ self
    pub fn then(&self, g: &MonotoneMap) -> MonotoneMap {
        debug_assert_eq!(self.cod, g.dom);
        MonotoneMap { dom: self.dom.clone(), cod: g.cod.clone(), table: self.table.iter().map(|&v| g.table[v as usize]).collect() }
    }
    pub fn tensor(&self, g: &MonotoneMap) -> MonotoneMap {
        let dom = self.dom.tensor(&g.dom);
        let cod = self.cod.tensor(&g.cod);
        let (n1, m1) = (self.dom.points(), self.cod.points());
        let table = (0..dom.points()).map(|p| (self.table[p % n1] as usize + m1 * g.table[p / n1] as usize) as u32).collect();
        MonotoneMap { dom, cod, table }
    }
    pub fn is_monotone(&self) -> bool {
        let n = self.dom.points();
        (0..n).all(|a| (0..n).all(|b| !self.dom.leq(a, b) || self.cod.leq(self.apply(a), self.apply(b))))
    }
    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.table.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }
    pub fn from_ordmap(f: &OrdMap) -> MonotoneMap {
        MonotoneMap {
            dom: Shape::chain(f.dom_pts() as u32 - 1),
            cod: Shape::chain(f.cod_pts as u32 - 1),
            table: f.table.iter().map(|&v| v as u32).collect(),
        }
    }
    pub fn from_cube(f: &CubeMap) -> MonotoneMap {
        MonotoneMap {
            dom: Shape::cube(f.dom),
            cod: Shape::cube(f.out.len()),
            table: (0..1u64 << f.dom).map(|p| f.apply_point(p) as u32).collect(),
        }
    }
    /// Recovers the □ normal form of a map between cubes, if it has one.
    pub fn to_cube(&self) -> Option<CubeMap> {
        if !self.dom.is_box() || !self.cod.is_box() {
            return None;
        }
        let m = self.dom.len();
        let mut out = Vec::new();
        for j in 0..self.cod.len() {
            let col: Vec<u32> = (0..self.dom.points()).map(|p| (self.table[p] >> j) & 1).collect();
            if col.iter().all(|&b| b == 0) {
                out.push(Coord::Zero);
            } else if col.iter().all(|&b| b == 1) {
                out.push(Coord::One);
            } else {
                let v = (0..m).find(|&v| col.iter().enumerate().all(|(p, &b)| b == ((p >> v) & 1) as u32))?;
                out.push(Coord::Var(v as u8));
            }
        }
        let cm = CubeMap { dom: m, out };
        cm.is_normal().then_some(cm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HomSite {
    Delta,
    Box,
    BoxPlus,
    Q,
}

/// Default cap on ⊞ word length.
pub const BOXPLUS_CAP: usize = 4;

/// Gap-free nonconstant monotone maps [a] → [b] (consecutive values differ by at most 1).
pub fn gap_free_maps(a: u32, b: u32) -> Vec<Vec<u32>> {
    let pa = Preorder::chain(a as usize);
    let pb = Preorder::chain(b as usize);
    monotone_maps(&pa, &pb)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[1] - w[0] <= 1) && t.first() != t.last())
        .collect()
}

fn boxplus_wiring(a: &Shape, b: &Shape) -> Vec<MonotoneMap> {
    #[derive(Clone)]
    enum W {
        Const(u32),
        Map(usize, Vec<u32>),
    }
    let mut out = Vec::new();
    let mut cur: Vec<W> = Vec::new();
    fn rec(a: &Shape, b: &Shape, next: usize, cur: &mut Vec<W>, out: &mut Vec<MonotoneMap>) {
        let j = cur.len();
        if j == b.len() {
            let m = MonotoneMap::from_coords(a, b, |x| {
                cur.iter()
                    .map(|w| match w {
                        W::Const(c) => *c,
                        W::Map(i, t) => t[x[*i] as usize],
                    })
                    .collect()
            });
            out.push(m);
            return;
        }
        for c in 0..=b.0[j] {
            cur.push(W::Const(c));
            rec(a, b, next, cur, out);
            cur.pop();
        }
        for i in next..a.len() {
            for t in gap_free_maps(a.0[i], b.0[j]) {
                cur.push(W::Map(i, t));
                rec(a, b, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(a, b, 0, &mut cur, &mut out);
    out
}

/// Enumerates a hom-set of the named site. Results are sorted.
pub fn hom_set(site: HomSite, a: &Shape, b: &Shape, cap: usize) -> Result<Vec<MonotoneMap>> {
    let mut maps = match site {
        HomSite::Delta => {
            if a.len() != 1 || b.len() != 1 {
                return Err(Error::Invalid(format!("Δ objects are single chains, got {a} and {b}")));
            }
            monotone_all(a, b)
        }
        HomSite::Q => monotone_all(a, b),
        HomSite::Box => {
            if !a.is_box() || !b.is_box() {
                return Err(Error::Invalid(format!("{a} or {b} is not a □-object")));
            }
            Cube::hom(a.len(), b.len()).iter().map(MonotoneMap::from_cube).collect()
        }
        HomSite::BoxPlus => {
            if !a.is_boxplus() || !b.is_boxplus() {
                return Err(Error::Invalid(format!("{a} or {b} is not a ⊞-object")));
            }
            if a.len() > cap || b.len() > cap {
                return Err(Error::SizeCap(format!("⊞ words {a}, {b} exceed length {cap}")));
            }
            boxplus_wiring(a, b)
        }
    };
    maps.sort();
    Ok(maps)
}

fn monotone_all(a: &Shape, b: &Shape) -> Vec<MonotoneMap> {
    monotone_maps(&a.preorder(), &b.preorder())
        .into_iter()
        .map(|t| MonotoneMap { dom: a.clone(), cod: b.clone(), table: t })
        .collect()
}

/// Saturates a set of single-factor generators under composition and tensor,
/// among all words over {1, 2} of length ≤ `max_len` (the empty word is the
/// point). Returns the hom-set between `a` and `b`. This is the slow oracle.
pub fn closure_hom(generators: &[MonotoneMap], a: &Shape, b: &Shape, max_len: usize) -> BTreeSet<MonotoneMap> {
    let norm = |s: &Shape| Shape(s.0.iter().copied().filter(|&f| f != 0).collect());
    let strip = |m: &MonotoneMap| MonotoneMap { dom: norm(&m.dom), cod: norm(&m.cod), table: m.table.clone() };
    let mut words = vec![Shape(vec![])];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for w in words.iter().filter(|w| w.len() == len - 1) {
            for f in [1, 2] {
                let mut v = w.0.clone();
                v.push(f);
                next.push(Shape(v));
            }
        }
        words.extend(next);
    }
    let mut maps: BTreeSet<MonotoneMap> = words.iter().map(MonotoneMap::identity).collect();
    maps.extend(generators.iter().map(strip));
    loop {
        let before = maps.len();
        let cur: Vec<MonotoneMap> = maps.iter().cloned().collect();
        for f in &cur {
            for g in &cur {
                if f.cod == g.dom {
                    maps.insert(f.then(g));
                }
                if f.dom.len() + g.dom.len() <= max_len && f.cod.len() + g.cod.len() <= max_len {
                    maps.insert(f.tensor(g));
                }
            }
        }
        if maps.len() == before {
            break;
        }
    }
    let (a, b) = (norm(a), norm(b));
    maps.into_iter().filter(|m| m.dom == a && m.cod == b).collect()
}

/// Single-factor ⊞ generators: every gap-free monotone map among [0], [1], [2].
pub fn boxplus_generators() -> Vec<MonotoneMap> {
    single_factor_maps(|t| t.windows(2).all(|w| w[1] - w[0] <= 1))
}

/// The generating set read literally: all monotone maps among [0], [1], [2]
/// except [1] → [2], i ↦ 2i. Its closure is strictly larger than ⊞.
pub fn literal_generators() -> Vec<MonotoneMap> {
    single_factor_maps(|t| t != [0, 2])
}

fn single_factor_maps(keep: impl Fn(&[u32]) -> bool) -> Vec<MonotoneMap> {
    let mut out = Vec::new();
    for a in 0..=2u32 {
        for b in 0..=2u32 {
            let (sa, sb) = (Shape::chain(a), Shape::chain(b));
            for m in monotone_all(&sa, &sb) {
                if keep(&m.table) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Ordinal sum f ⊕ g; either side may be the empty ordinal.
pub fn ordinal_sum(f: &OrdMap, g: &OrdMap) -> OrdMap {
    let mut table = f.table.clone();
    table.extend(g.table.iter().map(|&v| v + f.cod_pts));
    OrdMap { cod_pts: f.cod_pts + g.cod_pts, table }
}

/// γ^Δ_[n]: [n] → [n] ⊕ [n], the inclusion of the first copy.
pub fn gamma_delta(n: usize) -> OrdMap {
    ordinal_sum(&OrdMap::id(n + 1), &OrdMap { cod_pts: n + 1, table: vec![] })
}

/// γ̄^Δ_[n]: [n] → [n] ⊕ [n], the inclusion of the second copy.
pub fn gamma_bar_delta(n: usize) -> OrdMap {
    ordinal_sum(&OrdMap { cod_pts: n + 1, table: vec![] }, &OrdMap::id(n + 1))
}

pub fn sdf_on_object(w: &Shape) -> Result<Shape> {
    if !w.is_box() {
        return Err(Error::Invalid(format!("{w} is not a □-object")));
    }
    Ok(Shape(w.0.iter().map(|&f| 2 * f).collect()))
}

/// 𝔰𝔡 on a □-morphism: constants ε become 2ε, variables stay variables.
pub fn sdf_on_morphism(m: &CubeMap) -> MonotoneMap {
    let dom = Shape(vec![2; m.dom]);
    let cod = Shape(vec![2; m.out.len()]);
    MonotoneMap::from_coords(&dom, &cod, |x| {
        m.out
            .iter()
            .map(|c| match *c {
                Coord::Zero => 0,
                Coord::One => 2,
                Coord::Var(v) => x[v as usize],
            })
            .collect()
    })
}

/// The ⟦n⟧-component of γ□ (max(1,-)-1 per factor) or of γ̄□ (min(-,1)).
pub fn gamma_box(n: usize, barred: bool) -> MonotoneMap {
    let per = |x: u32| if barred { x.min(1) } else { x.max(1) - 1 };
    MonotoneMap::from_coords(&Shape(vec![2; n]), &Shape::cube(n), |x| x.iter().map(|&v| per(v)).collect())
}

/// The unique injective □-morphism sending the bottom vertex to `lo` and the
/// top vertex to `hi` (points of ⟦n⟧ as bitmasks).
pub fn subcube_inclusion(n: usize, lo: u64, hi: u64) -> Result<CubeMap> {
    if lo & !hi != 0 {
        return Err(Error::Invalid(format!("{lo:b} ≰ {hi:b}")));
    }
    let mut k = 0u8;
    let out = (0..n)
        .map(|j| match ((lo >> j) & 1, (hi >> j) & 1) {
            (0, 0) => Coord::Zero,
            (1, 1) => Coord::One,
            _ => {
                k += 1;
                Coord::Var(k - 1)
            }
        })
        .collect();
    Ok(CubeMap { dom: k as usize, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preorder_counts() {
        // labelled and unlabelled preorders (topologies) on n points
        let labelled: Vec<usize> = (1..=4).map(|n| Preorder::all_on(n).len()).collect();
        let unlabelled: Vec<usize> = (1..=4).map(|n| Preorder::all_up_to_iso(n).len()).collect();
        assert_eq!(labelled, vec![1, 4, 29, 355]);
        assert_eq!(unlabelled, vec![1, 3, 9, 33]);
    }

    #[test]
    fn boxplus_one_to_two() {
        let maps = hom_set(HomSite::BoxPlus, &Shape::chain(1), &Shape::chain(2), BOXPLUS_CAP).unwrap();
        let tables: Vec<Vec<u32>> = maps.iter().map(|m| m.table.clone()).collect();
        assert_eq!(tables.len(), 5);
        assert!(!tables.contains(&vec![0, 2]));
    }

    #[test]
    fn literal_generators_admit_the_jump() {
        let c = closure_hom(&literal_generators(), &Shape::chain(1), &Shape::chain(2), 1);
        assert_eq!(c.len(), 6);
    }

    #[test]
    fn q_two_cube_to_interval_is_dedekind() {
        let maps = hom_set(HomSite::Q, &Shape::cube(2), &Shape::chain(1), 0).unwrap();
        assert_eq!(maps.len(), 6);
    }

    #[test]
    fn ordinal_sum_gammas() {
        assert_eq!(ordinal_sum(&OrdMap::id(2), &OrdMap::id(2)), OrdMap::id(4));
        assert_eq!(gamma_delta(1).table, vec![0, 1]);
        assert_eq!(gamma_bar_delta(1).table, vec![2, 3]);
        assert_eq!(gamma_delta(1).cod_pts, 4);
    }

    #[test]
    fn gamma_box_values() {
        assert_eq!(gamma_box(1, false).table, vec![0, 0, 1]);
        assert_eq!(gamma_box(1, true).table, vec![0, 1, 1]);
        assert!(gamma_box(0, false).is_identity());
    }

    #[test]
    fn subcube_examples() {
        let f = subcube_inclusion(2, 0b01, 0b01).unwrap();
        assert_eq!(f.dom, 0);
        assert_eq!(subcube_inclusion(2, 0, 0b11).unwrap(), Cube::identity(2));
        // ε′ = (0,0), ε″ = (0,1): the second coordinate varies
        let g = subcube_inclusion(2, 0, 0b10).unwrap();
        assert_eq!(g.out, vec![Coord::Zero, Coord::Var(0)]);
        assert!(subcube_inclusion(2, 0b01, 0b10).is_err());
    }

    #[test]
    fn preorder_census() {
        // labelled preorders on n points: 1, 1, 4, 29, 355
        let counts: Vec<usize> = (0..=4).map(|n| Preorder::all_on(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 29, 355]);
    }
}
