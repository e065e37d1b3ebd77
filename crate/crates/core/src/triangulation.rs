//! Nerves of preorders, triangulation of cubical sets, its right adjoint qua,
//! the adjunction data, and the comparison tri∘sd ≅ sd∘tri.

use crate::error::{Error, Result};
use crate::order::{gamma_box, monotone_maps, Preorder, Shape};
use crate::presheaf::{
    enumerate_morphisms, extend, extend_morphism, from_levels, Cell, CellId, Extension, LevelBuild, LevelFunctor,
    Morphism, Presheaf, RepFunctor, SearchOptions,
};
use crate::site::{Cube, CubeMap, OrdMap, Simplex, Site};
use crate::subdivision::{sd_cubical, sd_simplicial, SdCube, SdSimplicial, Subdivision};
use std::collections::{HashMap, HashSet};

fn is_poset(p: &Preorder) -> bool {
    (0..p.n).all(|a| (0..p.n).all(|b| a == b || !(p.le(a, b) && p.le(b, a))))
}

fn is_discrete(p: &Preorder) -> bool {
    (0..p.n).all(|a| (0..p.n).all(|b| a == b || !p.le(a, b)))
}

/// ner^Δ P, with cells stored up to level `levels`. Truncated unless P is a
/// poset and `levels` reaches its longest chain.
pub fn nerve_simplicial(p: &Preorder, levels: usize) -> LevelBuild<Simplex, Vec<u32>> {
    let lv = (0..=levels).map(|k| monotone_maps(&Preorder::chain(k), p)).collect();
    let complete = is_poset(p) && levels + 1 >= p.n;
    from_levels::<Simplex, _, _>(lv, |_, v: &Vec<u32>, f: &OrdMap| f.table.iter().map(|&i| v[i]).collect(), (!complete).then_some(levels))
}

/// ner^□ P with cells 𝒬(⟦k⟧, P) up to level `levels`; truncated unless P is discrete.
pub fn nerve_cubical(p: &Preorder, levels: usize) -> LevelBuild<Cube, Vec<u32>> {
    let lv = (0..=levels).map(|k| monotone_maps(&Shape::cube(k).preorder(), p)).collect();
    from_levels::<Cube, _, _>(
        lv,
        |_, v: &Vec<u32>, f: &CubeMap| (0..1u64 << f.dom).map(|x| v[f.apply_point(x) as usize]).collect(),
        (!is_discrete(p)).then_some(levels),
    )
}

/// The functor ⟦n⟧ ↦ ner^Δ⟦n⟧ whose extension is tri. Values are chains of
/// points of ⟦n⟧ written as bitmasks.
pub type TriFunctor = LevelFunctor<Cube, Simplex, Vec<u32>>;

/// Chains are stored up to level `levels` so that degenerate chains of that
/// length can be named.
pub fn tri_functor(max_n: usize, levels: usize) -> TriFunctor {
    let builds = (0..=max_n).map(|n| nerve_simplicial(&Shape::cube(n).preorder(), levels.max(n))).collect();
    LevelFunctor::new(builds, |f: &CubeMap, c: &Vec<u32>| c.iter().map(|&x| f.apply_point(x as u64) as u32).collect())
}

pub struct Tri {
    pub ext: Extension<Simplex>,
    pub functor: TriFunctor,
}

impl Tri {
    pub fn presheaf(&self) -> &Presheaf<Simplex> {
        &self.ext.presheaf
    }
    /// The simplex named by a chain of ⟦dim σ⟧ inside the copy of σ.
    pub fn chain_cell(&self, sigma: CellId, chain: &[u32]) -> Cell {
        let y = self.functor.builds[sigma.dim].cell(chain.len() - 1, &chain.to_vec()).expect("chain in ⟦n⟧");
        self.ext.cell_nd(sigma, y)
    }
    /// The chain and carrier cell behind a nondegenerate simplex.
    pub fn chain_of(&self, c: CellId) -> (CellId, Vec<u32>) {
        let (sigma, y) = self.ext.rep(c);
        (sigma, self.functor.value_of(sigma.dim, y, |v, s: &OrdMap| s.table.iter().map(|&i| v[i]).collect()))
    }
}

pub fn tri(b: &Presheaf<Cube>) -> Tri {
    tri_with_levels(b, b.top())
}

pub fn tri_with_levels(b: &Presheaf<Cube>, levels: usize) -> Tri {
    let functor = tri_functor(b.top(), levels);
    let ext = extend(b, &functor);
    Tri { ext, functor }
}

/// tri h: tri B → tri B'.
pub fn tri_morphism(h: &Morphism, src: &Tri, tgt: &Tri) -> Morphism {
    let n = src.functor.builds.len().max(tgt.functor.builds.len()) - 1;
    extend_morphism(h, &src.ext, &tgt.ext, &tri_functor(n, n))
}

/// qua X up to level `max_dim`: level-n cells are simplicial maps tri □⟦n⟧ → X.
pub struct Qua {
    pub build: LevelBuild<Cube, Morphism>,
    pub functor: TriFunctor,
}

pub fn qua(x: &Presheaf<Simplex>, max_dim: usize) -> Result<Qua> {
    let functor = tri_functor(max_dim, max_dim);
    let mut levels = Vec::with_capacity(max_dim + 1);
    for n in 0..=max_dim {
        levels.push(enumerate_morphisms(functor.obj(n), x, &SearchOptions::default())?);
    }
    let build = from_levels::<Cube, _, _>(
        levels,
        |k, q: &Morphism, f: &CubeMap| functor.map(f).then(q, functor.obj(k)),
        Some(max_dim),
    );
    Ok(Qua { build, functor })
}

impl Qua {
    pub fn presheaf(&self) -> &Presheaf<Cube> {
        &self.build.presheaf
    }
    pub fn max_dim(&self) -> usize {
        self.functor.builds.len() - 1
    }
    /// The simplicial map carried by any cell, degenerate or not.
    pub fn value_of(&self, c: Cell) -> Morphism {
        let q = self.build.value(c.base);
        let s = Cube::surj_from_code(c.level, c.code);
        self.functor.map(&s).then(q, self.functor.obj(c.base.dim))
    }
    pub fn cell(&self, q: &Morphism, level: usize) -> Option<Cell> {
        self.build.cell(level, q)
    }
}

/// The composite tri □⟦n⟧ → tri B picking out σ.
fn cell_map(t: &Tri, sigma: CellId) -> Morphism {
    let obj = t.functor.obj(sigma.dim);
    Morphism { images: (0..=obj.top()).map(|d| obj.cells(d).map(|y| t.ext.cell_nd(sigma, Cell::nd(y))).collect()).collect() }
}

/// η_B: B → qua tri B.
pub fn adjunction_unit(b: &Presheaf<Cube>, t: &Tri, q: &Qua) -> Result<Morphism> {
    if b.top() > q.max_dim() {
        return Err(Error::Invalid(format!("qua stores {} levels, B has dimension {}", q.max_dim(), b.top())));
    }
    let images = (0..=b.top())
        .map(|d| {
            b.cells(d)
                .map(|s| q.cell(&cell_map(t, s), d).ok_or_else(|| Error::Violation(format!("η misses cell {s:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Morphism { images })
}

/// ε_X: tri qua X → X, with tri applied to the stored skeleton of qua X.
pub fn adjunction_counit(x: &Presheaf<Simplex>, q: &Qua) -> (Tri, Morphism) {
    let t = tri(q.presheaf());
    let p = t.presheaf();
    let images = (0..=p.top())
        .map(|d| {
            p.cells(d)
                .map(|c| {
                    let (sigma, y) = t.ext.rep(c);
                    q.value_of(Cell::nd(sigma)).apply(x, y)
                })
                .collect()
        })
        .collect();
    (t, Morphism { images })
}

/// h ↦ h♭: Hom(tri B, X) → Hom(B, qua X).
pub fn transpose_left(h: &Morphism, b: &Presheaf<Cube>, t: &Tri, x: &Presheaf<Simplex>, q: &Qua) -> Result<Morphism> {
    let images = (0..=b.top())
        .map(|d| {
            b.cells(d)
                .map(|s| {
                    let m = cell_map(t, s).then(h, t.presheaf());
                    q.cell(&m, d).ok_or_else(|| Error::Violation(format!("transpose misses {s:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let _ = x;
    Ok(Morphism { images })
}

/// g ↦ g♯: Hom(B, qua X) → Hom(tri B, X).
pub fn transpose_right(g: &Morphism, t: &Tri, x: &Presheaf<Simplex>, q: &Qua) -> Morphism {
    let p = t.presheaf();
    let images = (0..=p.top())
        .map(|d| {
            p.cells(d)
                .map(|c| {
                    let (sigma, y) = t.ext.rep(c);
                    q.value_of(g.image(sigma)).apply(x, y)
                })
                .collect()
        })
        .collect();
    Morphism { images }
}

/// Φ: tri sd B → sd tri B together with everything needed to check it.
pub struct SdTriComparison {
    pub tri_sd: Tri,
    pub sd_tri: SdSimplicial,
    pub tri_b: Tri,
    pub sd_b: SdCube,
    pub phi: Morphism,
}

/// α on a chain c of length k+1 in [2]^n: the chain of length 2k+2 in ⟦n⟧
/// given by γ□ on the first copy and γ̄□ on the second.
pub fn alpha_chain(n: usize, c: &[u32]) -> Vec<u32> {
    let g = gamma_box(n, false);
    let gb = gamma_box(n, true);
    c.iter().map(|&p| g.apply(p as usize) as u32).chain(c.iter().map(|&p| gb.apply(p as usize) as u32)).collect()
}

pub fn sd_tri_comparison(b: &Presheaf<Cube>) -> Result<SdTriComparison> {
    let sd_b = sd_cubical(b);
    let tri_sd = tri(sd_b.presheaf());
    let tri_b = tri_with_levels(b, 2 * b.top() + 1);
    let sd_tri = sd_simplicial(tri_b.presheaf());
    let src = tri_sd.presheaf();
    let mut images: Vec<Vec<Cell>> = Vec::with_capacity(src.top() + 1);
    for k in 0..=src.top() {
        let mut l = Vec::with_capacity(src.count(k));
        for c in src.cells(k) {
            let (tau, y) = tri_sd.chain_of(c);
            let (sigma, zc) = sd_b.ext.rep(tau);
            let z = sd_b.value(sigma.dim, zc);
            let chain: Vec<u32> = y.iter().map(|&p| z.apply(p as usize) as u32).collect();
            let a = alpha_chain(sigma.dim, &chain);
            if a.windows(2).any(|w| w[0] & !w[1] != 0) {
                return Err(Error::Violation(format!("α leaves the nerve at {c}")));
            }
            let cell = tri_b.chain_cell(sigma, &a);
            let image = sd_tri.build.cell(k, &cell).ok_or_else(|| Error::Violation(format!("α image missing for {c}")))?;
            l.push(image);
        }
        images.push(l);
    }
    let phi = Morphism { images };
    Ok(SdTriComparison { tri_sd, sd_tri, tri_b, sd_b, phi })
}

impl SdTriComparison {
    /// Φ is a morphism and an isomorphism, and γ_{tri B}∘Φ = tri γ_B and
    /// likewise for γ̄.
    pub fn verify(&self, b: &Presheaf<Cube>) -> Result<()> {
        let (src, tgt) = (self.tri_sd.presheaf(), self.sd_tri.presheaf());
        if !self.phi.verify(src, tgt) {
            return Err(Error::Violation("Φ is not simplicial".into()));
        }
        if !self.phi.is_iso(tgt) {
            return Err(Error::Violation("Φ is not a bijection".into()));
        }
        for barred in [false, true] {
            let lhs = self.phi.then(&self.sd_tri.gamma(self.tri_b.presheaf(), barred), tgt);
            let gb = self.sd_b.gamma(b, barred);
            let rhs = tri_morphism(&gb, &self.tri_sd, &self.tri_b);
            if lhs != rhs {
                return Err(Error::Violation(format!("{} triangle fails", if barred { "γ̄" } else { "γ" })));
            }
        }
        Ok(())
    }
}

/// Level sizes of qua tri B and of the colimit of ner^□⟦n⟧ over the cells of B,
/// after checking that the canonical comparison is a levelwise bijection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QtWitness {
    pub qua_levels: Vec<usize>,
    pub colimit_levels: Vec<usize>,
}

pub fn qt_colimit_check(b: &Presheaf<Cube>, max_dim: usize) -> Result<QtWitness> {
    let t = tri_with_levels(b, max_dim);
    let q = qua(t.presheaf(), max_dim)?;
    let n_top = b.top();
    let nerves: Vec<LevelBuild<Cube, Vec<u32>>> = (0..=n_top).map(|n| nerve_cubical(&Shape::cube(n).preorder(), max_dim)).collect();
    let g = LevelFunctor::<Cube, Cube, Vec<u32>>::new(nerves, |f: &CubeMap, v: &Vec<u32>| v.iter().map(|&x| f.apply_point(x as u64) as u32).collect());
    let colim = extend(b, &g);
    let mut witness = QtWitness { qua_levels: Vec::new(), colimit_levels: Vec::new() };
    for k in 0..=max_dim {
        // (σ, y: ⟦k⟧ → ⟦n⟧) ↦ the map tri □⟦k⟧ → tri B sending a chain c to (σ, y∘c)
        let mut image_of: HashMap<Cell, Morphism> = HashMap::new();
        for n in 0..=n_top {
            let obj = g.obj(n);
            for sigma in b.cells(n) {
                for y in obj.level(k) {
                    let yv = g.value_of(n, y, |v, s: &CubeMap| (0..1u64 << s.dom).map(|x| v[s.apply_point(x) as usize]).collect());
                    let src = q.functor.obj(k);
                    let m = Morphism {
                        images: (0..=src.top())
                            .map(|d| {
                                src.cells(d)
                                    .map(|c| {
                                        let chain: Vec<u32> = q.functor.builds[k].value(c).iter().map(|&p| yv[p as usize]).collect();
                                        t.chain_cell(sigma, &chain)
                                    })
                                    .collect()
                            })
                            .collect(),
                    };
                    let cell = colim.cell_nd(sigma, y);
                    if let Some(old) = image_of.insert(cell, m.clone()) {
                        if old != m {
                            return Err(Error::Violation(format!("comparison ill-defined at level {k}")));
                        }
                    }
                }
            }
        }
        let qua_level: HashSet<Morphism> = q.presheaf().level(k).into_iter().map(|c| q.value_of(c)).collect();
        let images: HashSet<&Morphism> = image_of.values().collect();
        if images.len() != image_of.len() {
            return Err(Error::Violation(format!("comparison not injective at level {k}")));
        }
        if images.len() != qua_level.len() || !images.iter().all(|m| qua_level.contains(*m)) {
            return Err(Error::Violation(format!(
                "comparison not surjective at level {k}: {} vs {}",
                images.len(),
                qua_level.len()
            )));
        }
        witness.qua_levels.push(qua_level.len());
        witness.colimit_levels.push(image_of.len());
    }
    Ok(witness)
}

/// The preorder on the level-n simplices of a simplicial set, generated by
/// g∘φ ≤ g∘φ' for every simplex g of dimension ≤ `gen_dim` and φ ≤ φ'
/// pointwise. Cells are listed as in `Presheaf::level`.
pub fn preorder_on_level(x: &Presheaf<Simplex>, n: usize, gen_dim: usize) -> (Vec<Cell>, Preorder) {
    let cells = x.level(n);
    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut rel = Vec::new();
    for k in 0..=gen_dim {
        let maps = Simplex::hom(n, k);
        let mut pairs = Vec::new();
        for (i, f) in maps.iter().enumerate() {
            for (j, g) in maps.iter().enumerate() {
                if f.table.iter().zip(&g.table).all(|(a, b)| a <= b) {
                    pairs.push((i, j));
                }
            }
        }
        for g in x.level(k) {
            let imgs: Vec<Cell> = maps.iter().map(|f| x.act(g, f)).collect();
            for &(i, j) in &pairs {
                rel.push((index[&imgs[i]], index[&imgs[j]]));
            }
        }
    }
    let p = Preorder::from_relations(cells.len(), &rel);
    (cells, p)
}

/// For ner^Δ P, checks that ner^Δ(P^[1]) and the graph of the preorder on
/// the simplices of ner^Δ P agree level by level up to `levels`, through the
/// map sending a chain of arrows (a_i ≤ b_i) to the pair (a, b).
pub fn graph_nerve_check(p: &Preorder, levels: usize) -> Result<Vec<usize>> {
    let (arrows, pairs) = p.arrows();
    let n_p = nerve_simplicial(p, 2 * levels + 1);
    let x = &n_p.presheaf;
    let mut sizes = Vec::new();
    for n in 0..=levels {
        let (cells, order) = preorder_on_level(x, n, 2 * n + 1);
        let table_of: Vec<Vec<u32>> = cells
            .iter()
            .map(|&c| {
                let v = n_p.value(c.base);
                Simplex::surj_from_code(c.level, c.code).table.iter().map(|&i| v[i]).collect()
            })
            .collect();
        let index: HashMap<&Vec<u32>, usize> = table_of.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let graph: HashSet<(usize, usize)> =
            (0..cells.len()).flat_map(|i| (0..cells.len()).map(move |j| (i, j))).filter(|&(i, j)| order.le(i, j)).collect();
        let lhs = monotone_maps(&Preorder::chain(n), &arrows);
        let mut image = HashSet::new();
        for chain in &lhs {
            let a: Vec<u32> = chain.iter().map(|&e| pairs[e as usize].0 as u32).collect();
            let b: Vec<u32> = chain.iter().map(|&e| pairs[e as usize].1 as u32).collect();
            let (ia, ib) = (index[&a], index[&b]);
            if !graph.contains(&(ia, ib)) {
                return Err(Error::Violation(format!("arrow chain {chain:?} is not in the graph at level {n}")));
            }
            image.insert((ia, ib));
        }
        if image.len() != lhs.len() || image.len() != graph.len() {
            return Err(Error::Violation(format!(
                "level {n}: {} arrow chains, {} distinct pairs, {} graph pairs",
                lhs.len(),
                image.len(),
                graph.len()
            )));
        }
        sizes.push(graph.len());
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::{find_isomorphism, representable};

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    #[test]
    fn nerves_of_small_orders() {
        let i = nerve_simplicial(&Preorder::chain(1), 3).presheaf;
        assert!(find_isomorphism(&i, &representable::<Simplex>(1).presheaf).is_some());
        let c = nerve_cubical(&Preorder::chain(1), 2).presheaf;
        assert_eq!(c.counts(), vec![2, 1, 2]);
        assert_eq!(nerve_simplicial(&Preorder::antichain(2), 2).presheaf.counts(), vec![2]);
    }

    #[test]
    fn triangulated_cubes() {
        for n in 0..=3 {
            let t = tri(&representable::<Cube>(n).presheaf);
            assert_eq!(t.presheaf().count(n), factorial(n));
            t.presheaf().check().unwrap();
        }
    }

    #[test]
    fn qua_of_interval() {
        let d1 = representable::<Simplex>(1).presheaf;
        let q = qua(&d1, 2).unwrap();
        assert_eq!(q.presheaf().level(1).len(), 3);
        let pt = qua(&representable::<Simplex>(0).presheaf, 2).unwrap();
        assert_eq!(pt.presheaf().counts(), vec![1]);
    }

    #[test]
    fn comparison_on_interval_and_square() {
        for n in 0..=2 {
            let b = representable::<Cube>(n).presheaf;
            let c = sd_tri_comparison(&b).unwrap();
            c.verify(&b).unwrap();
        }
    }

    #[test]
    fn qt_on_interval_matches_nerve() {
        let w = qt_colimit_check(&representable::<Cube>(1).presheaf, 2).unwrap();
        let nerve = nerve_cubical(&Preorder::chain(1), 2).presheaf;
        let sizes: Vec<usize> = (0..=2).map(|k| nerve.level(k).len()).collect();
        assert_eq!(w.qua_levels, sizes);
    }

    #[test]
    fn graph_nerves_on_three_points() {
        for p in Preorder::all_on(3) {
            graph_nerve_check(&p, 2).unwrap();
        }
    }
}
