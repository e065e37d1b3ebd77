//! Edgewise subdivision of simplicial sets, cubical subdivision, the natural
//! maps γ and γ̄, iterated composites of them, and folding inside sd².

use crate::error::{Error, Result};
use crate::order::{gamma_bar_delta, gamma_box, gamma_delta, hom_set, ordinal_sum, sdf_on_morphism, HomSite, MonotoneMap, Shape};
use crate::presheaf::{
    enumerate_morphisms, extend, extend_morphism, find_isomorphism, from_levels, representable, Cell, CellId, Extension,
    LevelBuild, LevelFunctor, Morphism, Presheaf, SearchOptions, Sub,
};
use crate::site::{Cube, CubeMap, OrdMap, Simplex, Site};

/// One application of a subdivision functor to a fixed presheaf.
pub trait Subdivision<S: Site> {
    fn presheaf(&self) -> &Presheaf<S>;
    /// The base cell generating the support of a nondegenerate cell.
    fn carrier(&self, c: CellId) -> CellId;
    /// γ (or γ̄ when `barred`) as a morphism into the base.
    fn gamma(&self, base: &Presheaf<S>, barred: bool) -> Morphism;
    /// Doubled local coordinates of each vertex of a nondegenerate cell inside
    /// its carrier: barycentric weights summing to 2 for simplices, points of
    /// [2]^n for cubes.
    fn vertex_chart(&self, c: CellId) -> Vec<Vec<u32>>;
}

/// Sites that know how to subdivide their presheaves.
pub trait Subdividable: Site {
    type Sd: Subdivision<Self>;
    fn subdivide(b: &Presheaf<Self>) -> Self::Sd;
    /// sd h: sd B → sd B' for h: B → B'.
    fn subdivide_morphism(h: &Morphism, src: &Self::Sd, tgt: &Self::Sd, tgt_base: &Presheaf<Self>) -> Morphism;
}

/// (sd B)[n] = B([n] ⊕ [n]); cells are stored as the corresponding cells of B.
pub struct SdSimplicial {
    pub build: LevelBuild<Simplex, Cell>,
}

pub fn sd_simplicial(b: &Presheaf<Simplex>) -> SdSimplicial {
    let levels = (0..=b.top()).map(|k| b.level(2 * k + 1)).collect();
    let build = from_levels::<Simplex, _, _>(levels, |_, &x, f: &OrdMap| b.act(x, &ordinal_sum(f, f)), b.truncation());
    SdSimplicial { build }
}

impl Subdivision<Simplex> for SdSimplicial {
    fn presheaf(&self) -> &Presheaf<Simplex> {
        &self.build.presheaf
    }
    fn carrier(&self, c: CellId) -> CellId {
        self.build.value(c).base
    }
    fn gamma(&self, base: &Presheaf<Simplex>, barred: bool) -> Morphism {
        let images = self
            .build
            .nondeg
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let g = if barred { gamma_bar_delta(k) } else { gamma_delta(k) };
                l.iter().map(|&x| base.act(x, &g)).collect()
            })
            .collect();
        Morphism { images }
    }
    fn vertex_chart(&self, c: CellId) -> Vec<Vec<u32>> {
        // vertex j of an m-cell is the edge (j, m+1+j) of its (2m+1)-cell
        let x = self.build.value(c);
        let s = Simplex::surj_from_code(x.level, x.code);
        let m = c.dim;
        (0..=m)
            .map(|j| {
                let mut w = vec![0u32; x.base.dim + 1];
                w[s.table[j]] += 1;
                w[s.table[m + 1 + j]] += 1;
                w
            })
            .collect()
    }
}

impl Subdividable for Simplex {
    type Sd = SdSimplicial;
    fn subdivide(b: &Presheaf<Simplex>) -> SdSimplicial {
        sd_simplicial(b)
    }
    fn subdivide_morphism(h: &Morphism, src: &SdSimplicial, tgt: &SdSimplicial, tgt_base: &Presheaf<Simplex>) -> Morphism {
        let images = src
            .build
            .nondeg
            .iter()
            .enumerate()
            .map(|(k, l)| l.iter().map(|&x| tgt.build.normal[k][&h.apply(tgt_base, x)]).collect())
            .collect();
        Morphism { images }
    }
}

/// F(n) = □[𝔰𝔡⟦n⟧], the ⊞-representable on [2]^n, with F(φ) = 𝔰𝔡φ ∘ −.
pub type SdFunctor = LevelFunctor<Cube, Cube, MonotoneMap>;

/// The ⊞-representable □[L]: level-k cells are ⊞(⟦k⟧, L). Value
/// dictionaries are kept up to at least level `min_levels`.
pub fn boxplus_representable(l: &Shape, min_levels: usize) -> LevelBuild<Cube, MonotoneMap> {
    let top = l.0.iter().filter(|&&f| f > 0).count().max(min_levels);
    let levels = (0..=top).map(|k| hom_set(HomSite::BoxPlus, &Shape::cube(k), l, usize::MAX).expect("⊞ hom")).collect();
    from_levels::<Cube, _, _>(levels, |_, v: &MonotoneMap, f: &CubeMap| MonotoneMap::from_cube(f).then(v), None)
}

pub fn sd_functor(max_n: usize) -> SdFunctor {
    let builds = (0..=max_n).map(|n| boxplus_representable(&Shape(vec![2; n]), max_n)).collect();
    LevelFunctor::new(builds, |phi: &CubeMap, v: &MonotoneMap| v.then(&sdf_on_morphism(phi)))
}

pub struct SdCube {
    pub ext: Extension<Cube>,
    pub functor: SdFunctor,
}

pub fn sd_cubical(b: &Presheaf<Cube>) -> SdCube {
    let functor = sd_functor(b.top());
    let ext = extend(b, &functor);
    SdCube { ext, functor }
}

impl SdCube {
    /// The ⊞-map [2]-cube cell behind a representative pair.
    pub fn value(&self, n: usize, y: Cell) -> MonotoneMap {
        self.functor.value_of(n, y, |v, s: &CubeMap| MonotoneMap::from_cube(s).then(v))
    }
}

impl Subdivision<Cube> for SdCube {
    fn presheaf(&self) -> &Presheaf<Cube> {
        &self.ext.presheaf
    }
    fn carrier(&self, c: CellId) -> CellId {
        self.ext.carrier(c)
    }
    fn gamma(&self, base: &Presheaf<Cube>, barred: bool) -> Morphism {
        let p = &self.ext.presheaf;
        let images = (0..=p.top())
            .map(|d| {
                p.cells(d)
                    .map(|c| {
                        let (sigma, y) = self.ext.rep(c);
                        let z = self.value(sigma.dim, y);
                        let g = z.then(&gamma_box(sigma.dim, barred)).to_cube().expect("γ∘z is a □-map");
                        base.act(Cell::nd(sigma), &g)
                    })
                    .collect()
            })
            .collect();
        Morphism { images }
    }
    fn vertex_chart(&self, c: CellId) -> Vec<Vec<u32>> {
        let (sigma, y) = self.ext.rep(c);
        let z = self.value(sigma.dim, y);
        (0..1usize << c.dim).map(|p| z.cod.coords(z.apply(p))).collect()
    }
}

impl Subdividable for Cube {
    type Sd = SdCube;
    fn subdivide(b: &Presheaf<Cube>) -> SdCube {
        sd_cubical(b)
    }
    fn subdivide_morphism(h: &Morphism, src: &SdCube, tgt: &SdCube, _tgt_base: &Presheaf<Cube>) -> Morphism {
        let n = src.functor.builds.len().max(tgt.functor.builds.len()) - 1;
        let f = sd_functor(n);
        extend_morphism(h, &src.ext, &tgt.ext, &f)
    }
}

/// B, sd B, …, sd^k B with the subdivisions between consecutive stages.
pub struct Tower<S: Subdividable> {
    pub stages: Vec<Presheaf<S>>,
    pub sds: Vec<S::Sd>,
}

impl<S: Subdividable> Tower<S> {
    pub fn new(b: &Presheaf<S>, k: usize) -> Self {
        let mut stages = vec![b.clone()];
        let mut sds = Vec::with_capacity(k);
        for i in 0..k {
            let sd = S::subdivide(&stages[i]);
            stages.push(sd.presheaf().clone());
            sds.push(sd);
        }
        Tower { stages, sds }
    }
    pub fn depth(&self) -> usize {
        self.sds.len()
    }
    pub fn top(&self) -> &Presheaf<S> {
        self.stages.last().unwrap()
    }
    /// γ or γ̄ out of stage i+1 into stage i.
    pub fn gamma_at(&self, i: usize, barred: bool) -> Morphism {
        self.sds[i].gamma(&self.stages[i], barred)
    }
    /// The word composite (w₁ w₂ … w_k)_B = (w₁)_B ∘ (w₂)_{sd B} ∘ … : sd^k B → B,
    /// with `true` standing for γ̄.
    pub fn composite(&self, word: &[bool]) -> Morphism {
        assert_eq!(word.len(), self.depth(), "word length must equal the tower depth");
        let k = self.depth();
        let mut m = Morphism::identity(self.top());
        for i in (0..k).rev() {
            let g = self.gamma_at(i, word[i]);
            m = m.then(&g, &self.stages[i + 1]);
        }
        m
    }
    /// Base cell generating supp_{sd^k}(⟨c⟩) for a cell c of the top stage.
    pub fn root_carrier(&self, c: CellId) -> CellId {
        let mut x = c;
        for i in (0..self.depth()).rev() {
            x = self.sds[i].carrier(x);
        }
        x
    }
    /// supp_{sd^k}(A, B) for a subpresheaf A of the top stage.
    pub fn support(&self, a: &Sub) -> Sub {
        Sub::generated(&self.stages[0], a.cells().map(|c| self.root_carrier(c)))
    }
    /// sd^k D as a subpresheaf of sd^k B.
    pub fn lift(&self, d: &Sub) -> Sub {
        let top = self.top();
        let mut s = Sub::empty(top);
        for c in top.all_cells() {
            if d.contains(self.root_carrier(c)) {
                s.mask[c.dim][c.idx] = true;
            }
        }
        s
    }
}

/// Supports by brute force: the intersection of all D ⊂ B with A ⊂ sd^k D,
/// where sd^k D is computed by subdividing D itself and mapping it in.
pub fn support_oracle<S: Subdividable>(tower: &Tower<S>, a: &Sub, subs: &[Sub]) -> Sub {
    let base = &tower.stages[0];
    let mut acc = Sub::full(base);
    for d in subs {
        let (dp, incl, _) = d.as_presheaf(base);
        let mut cur_incl = incl;
        let mut cur = dp;
        for i in 0..tower.depth() {
            let sd_d = S::subdivide(&cur);
            let m = S::subdivide_morphism(&cur_incl, &sd_d, &tower.sds[i], &tower.stages[i]);
            cur = sd_d.presheaf().clone();
            cur_incl = m;
        }
        let image = Sub::image(&cur_incl, &cur, tower.top());
        if a.is_subset(&image) {
            acc = acc.intersection(d);
        }
    }
    acc
}

/// Outcome of folding an atomic A ⊂ sd²C.
#[derive(Clone, Debug)]
pub struct Fold {
    /// The minimal B ⊂ C with A ∩ sd²B ≠ ∅.
    pub b: Sub,
    /// A ∩ sd²B inside sd²C.
    pub core: Sub,
    /// The retraction A → A ∩ sd²B, as a map of subpresheaves of sd²C
    /// (cells of A ↦ cells of sd²C).
    pub retraction: Morphism,
    /// dim of the representable A ∩ sd²B is isomorphic to.
    pub core_dim: usize,
}

/// (γγ̄)_C = γ_C ∘ γ̄_{sd C} : sd²C → C.
pub fn gamma_gamma_bar<S: Subdividable>(tower: &Tower<S>) -> Morphism {
    assert_eq!(tower.depth(), 2);
    tower.composite(&[false, true])
}

/// Lemma-level folding of the atomic subpresheaf generated by `a` in sd²C.
/// Every assertion of the folding lemma is checked; a failure is reported as
/// a violation rather than patched.
pub fn fold_atomic<S: Subdividable>(tower: &Tower<S>, gg: &Morphism, a: CellId) -> Result<Fold> {
    let top = tower.top();
    let base = &tower.stages[0];
    let asub = Sub::hull(top, a);
    let supports: Vec<Sub> = asub.cells().map(|x| Sub::hull(base, tower.root_carrier(x))).collect();
    let b = supports
        .iter()
        .find(|s| supports.iter().all(|t| s.is_subset(t)))
        .cloned()
        .ok_or_else(|| Error::Violation(format!("no least subobject meets cell {a:?}")))?;
    let core = asub.intersection(&tower.lift(&b));
    if core.is_empty() {
        return Err(Error::Violation(format!("A ∩ sd²B is empty for cell {a:?}")));
    }
    let (ap, aincl, _) = asub.as_presheaf(top);
    let (cp, cincl, cmap) = core.as_presheaf(top);
    // pin each core cell (indexed inside A) to itself (indexed inside the core)
    let mut pinned = Vec::new();
    for d in 0..=ap.top() {
        for c in ap.cells(d) {
            let orig = aincl.image(c).base;
            if let Some(j) = cmap[orig.dim].get(orig.idx).copied().flatten() {
                pinned.push((c, Cell::nd(CellId::new(orig.dim, j))));
            }
        }
    }
    let opts = SearchOptions { pinned, ..Default::default() };
    let rets = enumerate_morphisms(&ap, &cp, &opts)?;
    if rets.len() != 1 {
        return Err(Error::Violation(format!("{} retractions onto A ∩ sd²B for cell {a:?}", rets.len())));
    }
    let pi = &rets[0];
    // retraction expressed on cells of sd²C
    let retraction = Morphism {
        images: pi.images.iter().map(|l| l.iter().map(|&y| cincl.apply(top, y)).collect()).collect(),
    };
    for d in 0..=ap.top() {
        for c in ap.cells(d) {
            let x = aincl.image(c);
            let lhs = gg.apply(base, x);
            let rhs = gg.apply(base, retraction.image(c));
            if lhs != rhs {
                return Err(Error::Violation(format!("folding square fails at cell {c} of A = ⟨{a:?}⟩")));
            }
        }
    }
    let core_dim = cp.dim().unwrap_or(0);
    let rep = representable::<S>(core_dim).presheaf;
    if find_isomorphism(&cp, &rep).is_none() {
        return Err(Error::Violation(format!("A ∩ sd²B is not representable for cell {a:?}")));
    }
    Ok(Fold { b, core, retraction, core_dim })
}

/// Checks (γγ̄)_C(Star⟨v⟩) ⊂ supp_{sd²}(⟨v⟩, C) and returns both sides.
pub fn star_collapse_check<S: Subdividable>(tower: &Tower<S>, gg: &Morphism, v: usize) -> Result<(Sub, Sub)> {
    let top = tower.top();
    let base = &tower.stages[0];
    let vs = Sub::hull(top, CellId::new(0, v));
    let star = vs.star(top);
    let image = Sub::generated(base, star.cells().map(|c| gg.image(c).base));
    let supp = tower.support(&vs);
    if !image.is_subset(&supp) {
        return Err(Error::Violation(format!("star of vertex {v} escapes its support")));
    }
    Ok((image, supp))
}

/// The dotted map of natural folding for ψ: C' → C'' and the atomic
/// A' = ⟨a⟩ ⊂ sd²C', with A'' the image of A' under sd²ψ.
pub fn natural_fold<S: Subdividable>(
    t1: &Tower<S>,
    t2: &Tower<S>,
    psi: &Morphism,
    a: CellId,
) -> Result<Morphism> {
    let sd1 = S::subdivide_morphism(psi, &t1.sds[0], &t2.sds[0], &t2.stages[0]);
    let sd2 = S::subdivide_morphism(&sd1, &t1.sds[1], &t2.sds[1], &t2.stages[1]);
    let top1 = t1.top();
    let top2 = t2.top();
    let a2 = sd2.image(a).base;
    let gg1 = gamma_gamma_bar(t1);
    let gg2 = gamma_gamma_bar(t2);
    let f1 = fold_atomic(t1, &gg1, a)?;
    let f2 = fold_atomic(t2, &gg2, a2)?;
    let (ap, aincl, _) = Sub::hull(top1, a).as_presheaf(top1);
    let (_, a2incl, a2map) = Sub::hull(top2, a2).as_presheaf(top2);
    let _ = a2incl;
    // d(x) = π''(α(x)) on the core of A'
    let mut images: Vec<Vec<Cell>> = vec![Vec::new(); ap.top() + 1];
    for d in 0..=ap.top() {
        for c in ap.cells(d) {
            let x = aincl.image(c);
            let y = sd2.apply(top2, x);
            // express y inside A'' and retract
            let yb = y.base;
            let j = a2map[yb.dim][yb.idx].ok_or_else(|| Error::Violation("sd²ψ does not carry A' into A''".into()))?;
            let r = f2.retraction.image(CellId::new(yb.dim, j));
            let z = top2.act(r, &S::surj_from_code(y.level, y.code));
            images[d].push(z);
        }
    }
    // the square: d ∘ π' = π'' ∘ α, with d read off on the core
    for d in 0..=ap.top() {
        for c in ap.cells(d) {
            let orig = aincl.image(c).base;
            let pc = f1.retraction.image(c);
            // position of π'(c) inside A'
            let k = (0..ap.count(pc.base.dim))
                .find(|&i| aincl.image(CellId::new(pc.base.dim, i)).base == pc.base)
                .ok_or_else(|| Error::Violation("retraction leaves A'".into()))?;
            let lhs = top2.act(images[pc.base.dim][k], &S::surj_from_code(pc.level, pc.code));
            if lhs != images[d][c.idx] {
                return Err(Error::Violation(format!("natural folding square fails at {orig:?}")));
            }
            if !f2.core.contains(images[d][c.idx].base) {
                return Err(Error::Violation("induced map leaves A'' ∩ sd²B''".into()));
            }
        }
    }
    // restrict to the core of A'
    let core_cells: Vec<Cell> = f1.core.cells().map(|c| {
        let k = (0..ap.count(c.dim)).find(|&i| aincl.image(CellId::new(c.dim, i)).base == c).unwrap();
        images[c.dim][k]
    }).collect();
    let mut out: Vec<Vec<Cell>> = vec![Vec::new(); f1.core.mask.len()];
    for (c, y) in f1.core.cells().zip(core_cells) {
        out[c.dim].push(y);
    }
    while out.last().is_some_and(|l| l.is_empty()) && out.len() > 1 {
        out.pop();
    }
    Ok(Morphism { images: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;

    #[test]
    fn sd_simplicial_counts() {
        let d1 = representable::<Simplex>(1).presheaf;
        let sd = sd_simplicial(&d1);
        assert_eq!(sd.presheaf().counts(), vec![3, 2]);
        let d2 = representable::<Simplex>(2).presheaf;
        let sd2 = sd_simplicial(&d2);
        assert_eq!(sd2.presheaf().count(2), 4);
        sd2.presheaf().check().unwrap();
    }

    #[test]
    fn sd_cubical_counts() {
        let i = representable::<Cube>(1).presheaf;
        assert_eq!(sd_cubical(&i).presheaf().counts(), vec![3, 2]);
        let sq = representable::<Cube>(2).presheaf;
        let s = sd_cubical(&sq);
        assert_eq!(s.presheaf().counts(), vec![9, 12, 4]);
        s.presheaf().check().unwrap();
    }

    #[test]
    fn gamma_on_interval_vertices() {
        let i = representable::<Cube>(1).presheaf;
        let s = sd_cubical(&i);
        let g = s.gamma(&i, false);
        assert!(g.verify(s.presheaf(), &i));
        // vertices of sd □[1] in [2]-order, mapped to vertices of □[1]
        let mut pairs: Vec<(u32, usize)> = s
            .presheaf()
            .cells(0)
            .map(|c| {
                let (sigma, y) = s.ext.rep(c);
                let z = s.value(sigma.dim, y);
                let pos = if sigma.dim == 0 { 2 * (i.vertices(Cell::nd(sigma))[0] as u32) } else { z.table[0] };
                let img = g.image(c).base.idx;
                (pos, i.vertices(Cell::nd(CellId::new(0, img)))[0])
            })
            .collect();
        pairs.sort();
        assert_eq!(pairs.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0, 0, 1]);
    }
}

#[cfg(test)]
mod fold_tests {
    use super::*;
    use crate::presheaf::{enumerate_subpresheaves, representable};

    fn fold_everything<S: Subdividable>(c: &Presheaf<S>) -> usize {
        let t = Tower::new(c, 2);
        let gg = gamma_gamma_bar(&t);
        assert!(gg.verify(t.top(), c));
        let subs = enumerate_subpresheaves(c, 100_000).unwrap();
        let mut n = 0;
        for a in t.top().all_cells() {
            let f = fold_atomic(&t, &gg, a).unwrap_or_else(|e| panic!("{e}"));
            // exhaustive minimality: every D meeting A contains B
            let asub = Sub::hull(t.top(), a);
            let meeting: Vec<&Sub> = subs.iter().filter(|d| !asub.intersection(&t.lift(d)).is_empty()).collect();
            assert!(meeting.iter().all(|d| f.b.is_subset(d)));
            assert!(meeting.contains(&&f.b));
            n += 1;
        }
        for v in 0..t.top().count(0) {
            star_collapse_check(&t, &gg, v).unwrap();
        }
        n
    }

    #[test]
    fn folds_in_the_square() {
        assert_eq!(fold_everything(&representable::<Cube>(2).presheaf), 25 + 40 + 16);
    }

    #[test]
    fn folds_in_the_interval() {
        assert_eq!(fold_everything(&representable::<Cube>(1).presheaf), 5 + 4);
        assert_eq!(fold_everything(&representable::<Simplex>(1).presheaf), 5 + 4);
    }

    #[test]
    fn endpoint_and_interior_folds() {
        let i = representable::<Cube>(1).presheaf;
        let t = Tower::new(&i, 2);
        let gg = gamma_gamma_bar(&t);
        for a in t.top().all_cells() {
            let f = fold_atomic(&t, &gg, a).unwrap();
            let touches_end = (0..2).any(|v| !Sub::hull(t.top(), a).intersection(&t.lift(&Sub::hull(&i, CellId::new(0, v)))).is_empty());
            if touches_end {
                assert_eq!(f.b.counts(), vec![1]);
                assert_eq!(f.core_dim, 0);
            } else {
                assert_eq!(f.b, Sub::full(&i));
                assert_eq!(f.core, Sub::hull(t.top(), a));
            }
        }
    }

    #[test]
    fn corner_square_collapses_to_its_corner() {
        let sq = representable::<Cube>(2).presheaf;
        let t = Tower::new(&sq, 2);
        let gg = gamma_gamma_bar(&t);
        let corners = t.top().cells(2).filter(|&a| {
            let f = fold_atomic(&t, &gg, a).unwrap();
            f.b.counts() == vec![1]
        });
        assert_eq!(corners.count(), 4);
    }

    #[test]
    fn supports_agree_with_brute_force() {
        let sq = representable::<Cube>(2).presheaf;
        let t = Tower::new(&sq, 2);
        let subs = enumerate_subpresheaves(&sq, 10_000).unwrap();
        for a in t.top().all_cells().step_by(7) {
            let asub = Sub::hull(t.top(), a);
            assert_eq!(t.support(&asub), support_oracle(&t, &asub, &subs), "cell {a:?}");
        }
    }

    #[test]
    fn natural_fold_along_maps() {
        let pt = representable::<Cube>(0).presheaf;
        let i = representable::<Cube>(1).presheaf;
        let sq = representable::<Cube>(2).presheaf;
        let (t0, t1, t2) = (Tower::new(&pt, 2), Tower::new(&i, 2), Tower::new(&sq, 2));
        // identity
        let id = Morphism::identity(&i);
        for a in t1.top().all_cells() {
            let d = natural_fold(&t1, &t1, &id, a).unwrap();
            let core = fold_atomic(&t1, &gamma_gamma_bar(&t1), a).unwrap().core;
            let expect: Vec<Vec<Cell>> = {
                let mut v: Vec<Vec<Cell>> = vec![Vec::new(); d.images.len()];
                for c in core.cells() {
                    v[c.dim].push(Cell::nd(c));
                }
                v
            };
            assert_eq!(d.images, expect);
        }
        // endpoint inclusions and degeneracies
        let ends = enumerate_morphisms(&pt, &i, &SearchOptions::default()).unwrap();
        assert_eq!(ends.len(), 2);
        for psi in &ends {
            let d = natural_fold(&t0, &t1, psi, CellId::new(0, 0)).unwrap();
            assert_eq!(d.images[0].len(), 1);
        }
        let degens: Vec<Morphism> = enumerate_morphisms(&sq, &i, &SearchOptions::default())
            .unwrap()
            .into_iter()
            .filter(|m| m.is_epi(&i) && m.images[2][0].code.count_ones() == 1)
            .collect();
        assert_eq!(degens.len(), 2);
        for psi in &degens {
            for a in t2.top().all_cells() {
                natural_fold(&t2, &t1, psi, a).unwrap();
            }
        }
    }
}
