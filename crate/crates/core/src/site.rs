//! The two indexing sites, Δ and the box category □, behind one trait.
//!
//! Presheaf storage only ever needs a handful of operations from a site:
//! composition, elementary faces and degeneracies, the epi–mono factorization,
//! and a bit-code for surjections so that normal cells stay `Copy`.

use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::hash::Hash;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteKind {
    Simplex,
    Cube,
}

/// Monotone map between finite ordinals, stored by value table.
/// `cod_pts` is the number of points of the codomain, so `[-1]` is 0 points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdMap {
    pub cod_pts: usize,
    pub table: Vec<usize>,
}

impl OrdMap {
    pub fn new(cod_pts: usize, table: Vec<usize>) -> Self {
        debug_assert!(table.iter().all(|&v| v < cod_pts));
        debug_assert!(table.windows(2).all(|w| w[0] <= w[1]));
        OrdMap { cod_pts, table }
    }
    pub fn id(pts: usize) -> Self {
        OrdMap { cod_pts: pts, table: (0..pts).collect() }
    }
    pub fn dom_pts(&self) -> usize {
        self.table.len()
    }
    /// g ∘ self
    pub fn then(&self, g: &OrdMap) -> OrdMap {
        OrdMap { cod_pts: g.cod_pts, table: self.table.iter().map(|&v| g.table[v]).collect() }
    }
    pub fn is_injective(&self) -> bool {
        self.table.windows(2).all(|w| w[0] < w[1])
    }
    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod_pts];
        for &v in &self.table {
            seen[v] = true;
        }
        seen.into_iter().all(|b| b)
    }
}

/// One output coordinate of a □-morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coord {
    Zero,
    One,
    Var(u8),
}

/// □-morphism ⟦dom⟧ → ⟦out.len()⟧ in normal form: the variables used appear
/// in strictly increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeMap {
    pub dom: usize,
    pub out: Vec<Coord>,
}

impl CubeMap {
    pub fn is_normal(&self) -> bool {
        let mut last: Option<u8> = None;
        for c in &self.out {
            if let Coord::Var(v) = *c {
                if (v as usize) >= self.dom || last.is_some_and(|l| l >= v) {
                    return false;
                }
                last = Some(v);
            }
        }
        true
    }
    /// Image of a vertex given as a coordinate bitmask.
    pub fn apply_point(&self, p: u64) -> u64 {
        let mut r = 0u64;
        for (j, c) in self.out.iter().enumerate() {
            let bit = match *c {
                Coord::Zero => 0,
                Coord::One => 1,
                Coord::Var(v) => (p >> v) & 1,
            };
            r |= bit << j;
        }
        r
    }
}

/// All `r`-element subsets of the low `k` bits, ascending.
pub fn subsets_of_size(k: usize, r: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if r > k {
        return out;
    }
    for m in 0u64..(1u64 << k) {
        if m.count_ones() as usize == r {
            out.push(m);
        }
    }
    out
}

pub trait Site: Clone + Copy + Debug + Default + Send + Sync + 'static {
    type Map: Clone + Debug + PartialEq + Eq + Hash + Ord + Send + Sync;
    const KIND: SiteKind;

    fn dom(f: &Self::Map) -> usize;
    fn cod(f: &Self::Map) -> usize;
    fn identity(n: usize) -> Self::Map;
    /// g ∘ f
    fn compose(g: &Self::Map, f: &Self::Map) -> Self::Map;
    fn is_identity(f: &Self::Map) -> bool {
        Self::dom(f) == Self::cod(f) && *f == Self::identity(Self::dom(f))
    }
    fn is_injective(f: &Self::Map) -> bool;

    /// Elementary faces of an n-cell, maps of shape n-1 → n.
    fn face_count(n: usize) -> usize;
    fn face(n: usize, i: usize) -> Self::Map;
    /// Elementary degeneracies n+1 → n.
    fn degeneracy_count(n: usize) -> usize;
    fn degeneracy(n: usize, i: usize) -> Self::Map;

    /// f = inj ∘ surj, returned as (surj, inj).
    fn factor(f: &Self::Map) -> (Self::Map, Self::Map);
    /// Writes a non-identity injection as `face(cod, i) ∘ rest`.
    fn split_face(d: &Self::Map) -> Option<(usize, Self::Map)>;
    fn hom(m: usize, n: usize) -> Vec<Self::Map>;

    /// Bit code of a surjection out of level `k`; the codomain is k - popcount.
    fn surj_code(s: &Self::Map) -> u64;
    fn surj_from_code(k: usize, code: u64) -> Self::Map;

    fn vertex_count(n: usize) -> usize;
    fn vertex(n: usize, p: usize) -> Self::Map;
    fn vertex_image(f: &Self::Map, p: usize) -> usize;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Simplex;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cube;

impl Site for Simplex {
    type Map = OrdMap;
    const KIND: SiteKind = SiteKind::Simplex;

    fn dom(f: &OrdMap) -> usize {
        f.table.len() - 1
    }
    fn cod(f: &OrdMap) -> usize {
        f.cod_pts - 1
    }
    fn identity(n: usize) -> OrdMap {
        OrdMap::id(n + 1)
    }
    fn compose(g: &OrdMap, f: &OrdMap) -> OrdMap {
        f.then(g)
    }
    fn is_injective(f: &OrdMap) -> bool {
        f.is_injective()
    }
    fn face_count(n: usize) -> usize {
        if n == 0 {
            0
        } else {
            n + 1
        }
    }
    fn face(n: usize, i: usize) -> OrdMap {
        OrdMap { cod_pts: n + 1, table: (0..n).map(|j| j + usize::from(j >= i)).collect() }
    }
    fn degeneracy_count(n: usize) -> usize {
        n + 1
    }
    fn degeneracy(n: usize, i: usize) -> OrdMap {
        OrdMap { cod_pts: n + 1, table: (0..n + 2).map(|j| j - usize::from(j > i)).collect() }
    }
    fn factor(f: &OrdMap) -> (OrdMap, OrdMap) {
        let mut img: Vec<usize> = f.table.clone();
        img.dedup();
        let mut surj = Vec::with_capacity(f.table.len());
        let mut r = 0;
        for (j, &v) in f.table.iter().enumerate() {
            if j > 0 && v != f.table[j - 1] {
                r += 1;
            }
            surj.push(r);
        }
        (OrdMap { cod_pts: img.len(), table: surj }, OrdMap { cod_pts: f.cod_pts, table: img })
    }
    fn split_face(d: &OrdMap) -> Option<(usize, OrdMap)> {
        let mut hit = vec![false; d.cod_pts];
        for &v in &d.table {
            hit[v] = true;
        }
        let j = (0..d.cod_pts).rev().find(|&v| !hit[v])?;
        let rest = d.table.iter().map(|&v| if v < j { v } else { v - 1 }).collect();
        Some((j, OrdMap { cod_pts: d.cod_pts - 1, table: rest }))
    }
    fn hom(m: usize, n: usize) -> Vec<OrdMap> {
        let mut out = Vec::new();
        let mut t = vec![0usize; m + 1];
        fn rec(i: usize, lo: usize, n: usize, t: &mut Vec<usize>, out: &mut Vec<OrdMap>) {
            if i == t.len() {
                out.push(OrdMap { cod_pts: n + 1, table: t.clone() });
                return;
            }
            for v in lo..=n {
                t[i] = v;
                rec(i + 1, v, n, t, out);
            }
        }
        rec(0, 0, n, &mut t, &mut out);
        out
    }
    fn surj_code(s: &OrdMap) -> u64 {
        let mut c = 0u64;
        for i in 0..s.table.len().saturating_sub(1) {
            if s.table[i] == s.table[i + 1] {
                c |= 1 << i;
            }
        }
        c
    }
    fn surj_from_code(k: usize, code: u64) -> OrdMap {
        let mut t = Vec::with_capacity(k + 1);
        let mut v = 0;
        t.push(0);
        for i in 0..k {
            if code >> i & 1 == 0 {
                v += 1;
            }
            t.push(v);
        }
        OrdMap { cod_pts: v + 1, table: t }
    }
    fn vertex_count(n: usize) -> usize {
        n + 1
    }
    fn vertex(n: usize, p: usize) -> OrdMap {
        OrdMap { cod_pts: n + 1, table: vec![p] }
    }
    fn vertex_image(f: &OrdMap, p: usize) -> usize {
        f.table[p]
    }
}

impl Site for Cube {
    type Map = CubeMap;
    const KIND: SiteKind = SiteKind::Cube;

    fn dom(f: &CubeMap) -> usize {
        f.dom
    }
    fn cod(f: &CubeMap) -> usize {
        f.out.len()
    }
    fn identity(n: usize) -> CubeMap {
        CubeMap { dom: n, out: (0..n).map(|i| Coord::Var(i as u8)).collect() }
    }
    fn compose(g: &CubeMap, f: &CubeMap) -> CubeMap {
        let out = g
            .out
            .iter()
            .map(|c| match *c {
                Coord::Var(v) => f.out[v as usize],
                k => k,
            })
            .collect();
        CubeMap { dom: f.dom, out }
    }
    fn is_injective(f: &CubeMap) -> bool {
        f.out.iter().filter(|c| matches!(c, Coord::Var(_))).count() == f.dom
    }
    fn face_count(n: usize) -> usize {
        2 * n
    }
    fn face(n: usize, i: usize) -> CubeMap {
        let (pos, eps) = (i / 2, i % 2);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(match j.cmp(&pos) {
                std::cmp::Ordering::Less => Coord::Var(j as u8),
                std::cmp::Ordering::Equal => {
                    if eps == 0 {
                        Coord::Zero
                    } else {
                        Coord::One
                    }
                }
                std::cmp::Ordering::Greater => Coord::Var((j - 1) as u8),
            });
        }
        CubeMap { dom: n - 1, out }
    }
    fn degeneracy_count(n: usize) -> usize {
        n + 1
    }
    fn degeneracy(n: usize, i: usize) -> CubeMap {
        let out = (0..n).map(|j| Coord::Var((if j < i { j } else { j + 1 }) as u8)).collect();
        CubeMap { dom: n + 1, out }
    }
    fn factor(f: &CubeMap) -> (CubeMap, CubeMap) {
        let used: Vec<u8> = f
            .out
            .iter()
            .filter_map(|c| if let Coord::Var(v) = *c { Some(v) } else { None })
            .collect();
        let surj = CubeMap { dom: f.dom, out: used.iter().map(|&v| Coord::Var(v)).collect() };
        let mut k = 0u8;
        let inj_out = f
            .out
            .iter()
            .map(|c| match *c {
                Coord::Var(_) => {
                    k += 1;
                    Coord::Var(k - 1)
                }
                c => c,
            })
            .collect();
        (surj, CubeMap { dom: used.len(), out: inj_out })
    }
    fn split_face(d: &CubeMap) -> Option<(usize, CubeMap)> {
        let j = d.out.iter().rposition(|c| !matches!(c, Coord::Var(_)))?;
        let eps = usize::from(d.out[j] == Coord::One);
        let mut rest = d.out.clone();
        rest.remove(j);
        Some((2 * j + eps, CubeMap { dom: d.dom, out: rest }))
    }
    fn hom(m: usize, n: usize) -> Vec<CubeMap> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(m: usize, n: usize, next: u8, cur: &mut Vec<Coord>, out: &mut Vec<CubeMap>) {
            if cur.len() == n {
                out.push(CubeMap { dom: m, out: cur.clone() });
                return;
            }
            for c in [Coord::Zero, Coord::One] {
                cur.push(c);
                rec(m, n, next, cur, out);
                cur.pop();
            }
            for v in next as usize..m {
                cur.push(Coord::Var(v as u8));
                rec(m, n, v as u8 + 1, cur, out);
                cur.pop();
            }
        }
        rec(m, n, 0, &mut cur, &mut out);
        out
    }
    fn surj_code(s: &CubeMap) -> u64 {
        let mut used = 0u64;
        for c in &s.out {
            if let Coord::Var(v) = *c {
                used |= 1 << v;
            }
        }
        ((1u64 << s.dom) - 1) & !used
    }
    fn surj_from_code(k: usize, code: u64) -> CubeMap {
        CubeMap { dom: k, out: (0..k).filter(|&i| code >> i & 1 == 0).map(|i| Coord::Var(i as u8)).collect() }
    }
    fn vertex_count(n: usize) -> usize {
        1 << n
    }
    fn vertex(n: usize, p: usize) -> CubeMap {
        CubeMap { dom: 0, out: (0..n).map(|j| if p >> j & 1 == 1 { Coord::One } else { Coord::Zero }).collect() }
    }
    fn vertex_image(f: &CubeMap, p: usize) -> usize {
        f.apply_point(p as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factor_roundtrip<S: Site>(max: usize) {
        for m in 0..=max {
            for n in 0..=max {
                for f in S::hom(m, n) {
                    let (s, d) = S::factor(&f);
                    assert_eq!(S::compose(&d, &s), f);
                    assert!(S::is_injective(&d));
                    let code = S::surj_code(&s);
                    assert_eq!(S::surj_from_code(m, code), s);
                    assert_eq!(m - code.count_ones() as usize, S::cod(&s));
                    let mut cur = d.clone();
                    while let Some((i, rest)) = S::split_face(&cur) {
                        assert_eq!(S::compose(&S::face(S::cod(&cur), i), &rest), cur);
                        cur = rest;
                    }
                    assert!(S::is_identity(&cur));
                }
            }
        }
    }

    #[test]
    fn simplex_factorization() {
        factor_roundtrip::<Simplex>(4);
    }

    #[test]
    fn cube_factorization() {
        factor_roundtrip::<Cube>(3);
    }

    #[test]
    fn hom_counts() {
        assert_eq!(Simplex::hom(1, 2).len(), 6);
        assert_eq!(Cube::hom(1, 1).len(), 3);
        // □(⟦1⟧,⟦2⟧): (c,c) x4, (x,c) x2, (c,x) x2
        assert_eq!(Cube::hom(1, 2).len(), 8);
        assert!(Cube::hom(3, 3).iter().all(|f| f.is_normal()));
    }

    #[test]
    fn cubical_face_identities() {
        // δ_{j,ε'} δ_{i,ε} = δ_{i,ε} δ_{j-1,ε'} for i < j
        for n in 2..=4 {
            for i in 0..n - 1 {
                for j in i + 1..n {
                    for e in 0..2 {
                        for e2 in 0..2 {
                            let lhs = Cube::compose(&Cube::face(n, 2 * j + e2), &Cube::face(n - 1, 2 * i + e));
                            let rhs = Cube::compose(&Cube::face(n, 2 * i + e), &Cube::face(n - 1, 2 * (j - 1) + e2));
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }
}
