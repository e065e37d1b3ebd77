//! The extension functor ex C = ∫^L Hom(□[L], C) · ner^□L over ⊞, evaluated
//! within a size budget on L, with the natural maps υ, ζ and the cubical
//! composition of nerves.
//!
//! A cell of ex C at level k is a class of triples (L, x, g) with
//! x: □[L] → C and g: ⟦k⟧ → L monotone. Every triple is equivalent to one
//! whose g spans each coordinate of L (restrict along the interval inclusion
//! of the span), so only spanning triples are stored. The coend relation
//! (x∘□φ, g) ~ (x, φ∘g) is imposed for the generating ⊞-maps φ: inserting or
//! dropping a coordinate, and elementary interval inclusions and merges on one
//! coordinate.

use crate::error::{Error, Result};
use crate::order::{monotone_maps, MonotoneMap, Preorder, Shape};
use crate::presheaf::{
    enumerate_morphisms, from_levels, Cell, CellId, LevelBuild, Morphism, Presheaf, SearchOptions,
};
use crate::site::{Cube, CubeMap, Site};
use crate::subdivision::{boxplus_representable, SdCube, Subdivision};
use crate::triangulation::nerve_cubical;
use std::collections::HashMap;
use std::hash::Hash;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoendBudget {
    /// Largest Σ aᵢ over ⊞-objects L = [a₁] ⊗ … ⊗ [a_r].
    pub max_size: usize,
    /// Highest stored level of ex C.
    pub max_dim: usize,
}

impl Default for CoendBudget {
    fn default() -> Self {
        CoendBudget { max_size: 4, max_dim: 2 }
    }
}

/// ⊞-objects, written as words in [1] and [2], of total size at most `max_size`.
pub fn boxplus_objects(max_size: usize, max_coords: usize) -> Vec<Shape> {
    fn rec(left: usize, max_coords: usize, cur: &mut Vec<u32>, out: &mut Vec<Shape>) {
        out.push(Shape(cur.clone()));
        if cur.len() == max_coords {
            return;
        }
        for a in 1..=left.min(2) {
            cur.push(a as u32);
            rec(left - a, max_coords, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(max_size, max_coords, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| (a.0.iter().sum::<u32>(), a.len(), &a.0).cmp(&(b.0.iter().sum::<u32>(), b.len(), &b.0)));
    out
}

fn size(l: &Shape) -> usize {
    l.0.iter().map(|&a| a as usize).sum()
}

/// Generating ⊞-maps φ: L' → L into `l`, with L' within the size bound.
pub fn generators_into(l: &Shape, max_size: usize, max_coords: usize) -> Vec<(Shape, MonotoneMap)> {
    let mut out = Vec::new();
    let r = l.len();
    let with = |v: Vec<u32>| Shape(v);
    // insert a constant coordinate
    for j in 0..r {
        let mut lp = l.0.clone();
        lp.remove(j);
        let lp = with(lp);
        for c in 0..=l.0[j] {
            out.push((lp.clone(), MonotoneMap::from_coords(&lp, l, |x| {
                let mut y = x.to_vec();
                y.insert(j, c);
                y
            })));
        }
    }
    // drop a coordinate
    if r < max_coords {
        for j in 0..=r {
            for b in 1..=(max_size.saturating_sub(size(l)).min(2)) as u32 {
                let mut lp = l.0.clone();
                lp.insert(j, b);
                let lp = with(lp);
                out.push((lp.clone(), MonotoneMap::from_coords(&lp, l, |x| {
                    let mut y = x.to_vec();
                    y.remove(j);
                    y
                })));
            }
        }
    }
    for j in 0..r {
        // interval inclusions [1] → [2]
        if l.0[j] == 2 {
            let mut lp = l.0.clone();
            lp[j] -= 1;
            let lp = with(lp);
            for s in 0..2 {
                out.push((lp.clone(), MonotoneMap::from_coords(&lp, l, |x| {
                    let mut y = x.to_vec();
                    y[j] += s;
                    y
                })));
            }
        }
        // merges [2] → [1]
        if l.0[j] == 1 && size(l) < max_size {
            let mut lp = l.0.clone();
            lp[j] += 1;
            let lp = with(lp);
            for i in 0..=l.0[j] {
                out.push((lp.clone(), MonotoneMap::from_coords(&lp, l, |x| {
                    let mut y = x.to_vec();
                    if y[j] > i {
                        y[j] -= 1;
                    }
                    y
                })));
            }
        }
    }
    out
}

/// Restricts g: ⟦k⟧ → L to the span of its image: returns L'', the interval
/// inclusion ι: L'' → L and g'' with g = ι∘g''.
pub fn span(g: &MonotoneMap) -> (Shape, MonotoneMap, MonotoneMap) {
    let l = &g.cod;
    let pts: Vec<Vec<u32>> = g.table.iter().map(|&p| l.coords(p as usize)).collect();
    let r = l.len();
    let lo: Vec<u32> = (0..r).map(|j| pts.iter().map(|p| p[j]).min().unwrap_or(0)).collect();
    let hi: Vec<u32> = (0..r).map(|j| pts.iter().map(|p| p[j]).max().unwrap_or(0)).collect();
    let keep: Vec<usize> = (0..r).filter(|&j| hi[j] > lo[j]).collect();
    let lpp = Shape(keep.iter().map(|&j| hi[j] - lo[j]).collect());
    let iota = MonotoneMap::from_coords(&lpp, l, |x| {
        let mut y = lo.clone();
        for (t, &j) in keep.iter().enumerate() {
            y[j] += x[t];
        }
        y
    });
    let gpp = MonotoneMap::from_coords(&g.dom, &lpp, |x| {
        let p = l.coords(g.apply(g.dom.index(x)));
        keep.iter().map(|&j| p[j] - lo[j]).collect()
    });
    (lpp, iota, gpp)
}

/// What ex needs to know about its argument: the maps □[L] → C and their
/// restriction along ⊞-maps.
pub trait ExTarget {
    type X: Clone + Eq + Hash + std::fmt::Debug;
    fn maps(&mut self, l: &Shape) -> Result<Vec<Self::X>>;
    /// x∘□[φ] for φ: L' → L.
    fn restrict(&mut self, x: &Self::X, phi: &MonotoneMap) -> Self::X;
    /// Largest number of coordinates for which maps can be enumerated.
    fn max_coords(&self) -> usize;
}

/// A finite cubical set; maps □[L] → C are found by search.
pub struct PresheafTarget<'a> {
    pub c: &'a Presheaf<Cube>,
    reps: HashMap<Shape, crate::presheaf::LevelBuild<Cube, MonotoneMap>>,
    levels: usize,
}

impl<'a> PresheafTarget<'a> {
    pub fn new(c: &'a Presheaf<Cube>, levels: usize) -> Self {
        PresheafTarget { c, reps: HashMap::new(), levels }
    }
    fn rep(&mut self, l: &Shape) -> &crate::presheaf::LevelBuild<Cube, MonotoneMap> {
        let levels = self.levels;
        self.reps.entry(l.clone()).or_insert_with(|| boxplus_representable(l, levels))
    }
    /// The map □[L] → C given on every cell value.
    pub fn from_values(&mut self, l: &Shape, f: impl Fn(&MonotoneMap) -> Cell) -> Morphism {
        let b = self.rep(l);
        Morphism { images: b.nondeg.iter().take(b.presheaf.top() + 1).map(|lv| lv.iter().map(&f).collect()).collect() }
    }
    /// x applied to a (possibly degenerate) ⊞-cell v: ⟦k⟧ → L.
    pub fn eval(&mut self, x: &Morphism, v: &MonotoneMap) -> Cell {
        let c = self.c;
        let b = self.rep(&v.cod);
        let cell = b.cell(v.dom.len(), v).expect("⊞-cell");
        x.apply(c, cell)
    }
}

impl ExTarget for PresheafTarget<'_> {
    type X = Morphism;
    fn maps(&mut self, l: &Shape) -> Result<Vec<Morphism>> {
        let c = self.c;
        let b = &self.rep(l).presheaf;
        enumerate_morphisms(b, c, &SearchOptions::default())
    }
    fn restrict(&mut self, x: &Morphism, phi: &MonotoneMap) -> Morphism {
        let src: Vec<Vec<MonotoneMap>> = {
            let b = self.rep(&phi.dom);
            b.nondeg.iter().take(b.presheaf.top() + 1).cloned().collect()
        };
        let images = src.iter().map(|lv| lv.iter().map(|v| self.eval(x, &v.then(phi))).collect()).collect();
        Morphism { images }
    }
    fn max_coords(&self) -> usize {
        self.c.truncation().unwrap_or(usize::MAX)
    }
}

/// ner^□P; maps □[L] → ner^□P are exactly the monotone maps L → P.
pub struct NerveTarget {
    pub p: Preorder,
}

impl ExTarget for NerveTarget {
    type X = Vec<u32>;
    fn maps(&mut self, l: &Shape) -> Result<Vec<Vec<u32>>> {
        Ok(monotone_maps(&l.preorder(), &self.p))
    }
    fn restrict(&mut self, x: &Vec<u32>, phi: &MonotoneMap) -> Vec<u32> {
        phi.table.iter().map(|&q| x[q as usize]).collect()
    }
    fn max_coords(&self) -> usize {
        usize::MAX
    }
}

/// ex C within a budget.
pub struct Ex<X> {
    pub presheaf: Presheaf<Cube>,
    pub budget: CoendBudget,
    pub shapes: Vec<Shape>,
    /// Maps □[L] → C per shape.
    pub maps: Vec<Vec<X>>,
    map_index: Vec<HashMap<X, usize>>,
    /// Level k: spanning triples (shape, map, g-table) are numbered
    /// base(shape, g-table) + map index; `elem_class` gives their classes.
    bases: Vec<HashMap<(usize, Vec<u32>), usize>>,
    elem_class: Vec<Vec<usize>>,
    reps: Vec<Vec<(usize, usize, Vec<u32>)>>,
    class_cell: Vec<Vec<Cell>>,
    nd_class: Vec<Vec<usize>>,
    /// Number of classes per level.
    pub level_sizes: Vec<usize>,
}

fn spanning(g: &MonotoneMap) -> bool {
    let r = g.cod.len();
    let pts: Vec<Vec<u32>> = g.table.iter().map(|&p| g.cod.coords(p as usize)).collect();
    (0..r).all(|j| pts.iter().any(|p| p[j] == 0) && pts.iter().any(|p| p[j] == g.cod.0[j]))
}

impl<X: Clone + Eq + Hash + std::fmt::Debug> Ex<X> {
    fn shape_index(&self, l: &Shape) -> Option<usize> {
        self.shapes.iter().position(|s| s == l)
    }

    fn class_index(&self, k: usize, key: &(usize, usize, Vec<u32>)) -> usize {
        let (si, xi, table) = key;
        self.elem_class[k][self.bases[k][&(*si, table.clone())] + xi]
    }

    /// The class of an arbitrary triple, after restricting to the span of g.
    fn key_of<T: ExTarget<X = X>>(&self, t: &mut T, _l: &Shape, x: &X, g: &MonotoneMap) -> (usize, usize, Vec<u32>) {
        let (lpp, iota, gpp) = span(g);
        let xpp = t.restrict(x, &iota);
        let si = self.shape_index(&lpp).expect("span stays within budget");
        let xi = *self.map_index[si].get(&xpp).unwrap_or_else(|| panic!("restricted map missing for {lpp}"));
        (si, xi, gpp.table)
    }

    /// The cell named by an arbitrary triple.
    pub fn cell_of<T: ExTarget<X = X>>(&self, t: &mut T, l: &Shape, x: &X, g: &MonotoneMap) -> Cell {
        let k = g.dom.len();
        let key = self.key_of(t, l, x, g);
        self.class_cell[k][self.class_index(k, &key)]
    }

    /// A representative triple of a nondegenerate cell.
    pub fn rep(&self, c: CellId) -> (&Shape, &X, MonotoneMap) {
        let (si, xi, g) = &self.reps[c.dim][self.nd_class[c.dim][c.idx]];
        let l = &self.shapes[*si];
        (l, &self.maps[*si][*xi], MonotoneMap { dom: Shape::cube(c.dim), cod: l.clone(), table: g.clone() })
    }
}

pub fn ex_with<T: ExTarget>(t: &mut T, budget: CoendBudget) -> Result<Ex<T::X>> {
    let max_coords = t.max_coords();
    let shapes = boxplus_objects(budget.max_size, max_coords);
    let mut maps = Vec::with_capacity(shapes.len());
    let mut map_index = Vec::with_capacity(shapes.len());
    for l in &shapes {
        let m = t.maps(l)?;
        map_index.push(m.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect::<HashMap<_, _>>());
        maps.push(m);
    }
    let mut ex = Ex {
        presheaf: Presheaf::empty(),
        budget,
        shapes,
        maps,
        map_index,
        bases: Vec::new(),
        elem_class: Vec::new(),
        reps: Vec::new(),
        class_cell: Vec::new(),
        nd_class: Vec::new(),
        level_sizes: Vec::new(),
    };
    let gens: Vec<Vec<(Shape, MonotoneMap)>> =
        ex.shapes.iter().map(|l| generators_into(l, budget.max_size, max_coords)).collect();
    // restricted maps x∘□φ, shared by all levels
    let mut restricted: Vec<Vec<Vec<usize>>> = Vec::with_capacity(ex.shapes.len());
    for (li, l) in ex.shapes.iter().enumerate() {
        let mut per_gen = Vec::with_capacity(gens[li].len());
        for (lp, phi) in &gens[li] {
            let lpi = ex.shape_index(lp).expect("generator source within budget");
            let _ = l;
            per_gen.push(
                ex.maps[li]
                    .iter()
                    .map(|x| {
                        let y = t.restrict(x, phi);
                        *ex.map_index[lpi].get(&y).expect("restriction of a map is a map")
                    })
                    .collect(),
            );
        }
        restricted.push(per_gen);
    }
    // index tables for x ↦ x∘□ι, keyed by (source shape, ι)
    let mut restrict_tables: HashMap<(usize, Vec<u32>, usize), Vec<usize>> = HashMap::new();
    let mut restrict_table = |ex: &Ex<T::X>, t: &mut T, src: usize, iota: &MonotoneMap| -> Vec<usize> {
        let dst = ex.shape_index(&iota.dom).expect("span stays within budget");
        restrict_tables
            .entry((src, iota.table.clone(), dst))
            .or_insert_with(|| ex.maps[src].iter().map(|x| ex.map_index[dst][&t.restrict(x, iota)]).collect())
            .clone()
    };
    let mut rep_slot: Vec<Vec<usize>> = Vec::new();
    for k in 0..=budget.max_dim {
        let cube = Shape::cube(k);
        let mut bases: HashMap<(usize, Vec<u32>), usize> = HashMap::new();
        let mut reps_of: Vec<(usize, Vec<u32>)> = Vec::new();
        let mut total = 0usize;
        let all_g: Vec<Vec<MonotoneMap>> = ex
            .shapes
            .iter()
            .map(|l| monotone_maps(&cube.preorder(), &l.preorder()).into_iter().map(|tb| MonotoneMap { dom: cube.clone(), cod: l.clone(), table: tb }).collect())
            .collect();
        for (si, gs) in all_g.iter().enumerate() {
            for g in gs.iter().filter(|g| spanning(g)) {
                bases.insert((si, g.table.clone()), total);
                reps_of.push((si, g.table.clone()));
                total += ex.maps[si].len();
            }
        }
        let mut uf: Vec<usize> = (0..total).collect();
        fn find(uf: &mut [usize], mut a: usize) -> usize {
            while uf[a] != a {
                uf[a] = uf[uf[a]];
                a = uf[a];
            }
            a
        }
        for li in 0..ex.shapes.len() {
            for (gi, (lp, phi)) in gens[li].iter().enumerate() {
                let lpi = ex.shape_index(lp).unwrap();
                for g in &all_g[lpi] {
                    // (x∘□φ, g) ~ (x, φ∘g), both reduced to their spans
                    let (lpp, iota_a, gpp) = span(g);
                    let (lq, iq, gq) = span(&g.then(phi));
                    let base_a = bases[&(ex.shape_index(&lpp).unwrap(), gpp.table)];
                    let base_b = bases[&(ex.shape_index(&lq).unwrap(), gq.table)];
                    let ta = restrict_table(&ex, t, lpi, &iota_a);
                    let tb = restrict_table(&ex, t, li, &iq);
                    for xi in 0..ex.maps[li].len() {
                        let a = base_a + ta[restricted[li][gi][xi]];
                        let b = base_b + tb[xi];
                        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                        if ra != rb {
                            uf[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
        let mut root_class: HashMap<usize, usize> = HashMap::new();
        let mut reps_k = Vec::new();
        let mut slots_k = Vec::new();
        let mut elem_class = vec![0; total];
        for (slot, (si, table)) in reps_of.iter().enumerate() {
            let base = bases[&(*si, table.clone())];
            for xi in 0..ex.maps[*si].len() {
                let r = find(&mut uf, base + xi);
                elem_class[base + xi] = *root_class.entry(r).or_insert_with(|| {
                    reps_k.push((*si, xi, table.clone()));
                    slots_k.push(slot);
                    reps_k.len() - 1
                });
            }
        }
        rep_slot.push(slots_k);
        ex.bases.push(bases);
        ex.elem_class.push(elem_class);
        ex.reps.push(reps_k);
    }
    let levels: Vec<Vec<usize>> = ex.reps.iter().map(|r| (0..r.len()).collect()).collect();
    let trunc = Some(budget.max_dim);
    let lb = {
        let ex_ref = &ex;
        let t_cell = std::cell::RefCell::new((&mut *t, restrict_table));
        // (level, slot, f) ↦ (base of the reduced slot, restriction table);
        // only the map index varies within a slot
        type Memo = HashMap<(usize, usize, CubeMap), (usize, std::rc::Rc<Vec<usize>>)>;
        let memo: std::cell::RefCell<Memo> = std::cell::RefCell::new(HashMap::new());
        from_levels::<Cube, usize, _>(
            levels,
            |k, &c, f: &CubeMap| {
                let (si, xi, g) = &ex_ref.reps[k][c];
                let dom = Cube::dom(f);
                let key = (k, rep_slot[k][c], f.clone());
                let hit = memo.borrow().get(&key).cloned();
                let (base, tab) = match hit {
                    Some(v) => v,
                    None => {
                        let l = &ex_ref.shapes[*si];
                        let g = MonotoneMap { dom: Shape::cube(k), cod: l.clone(), table: g.clone() };
                        let (lpp, iota, gpp) = span(&MonotoneMap::from_cube(f).then(&g));
                        let base = ex_ref.bases[dom][&(ex_ref.shape_index(&lpp).expect("span within budget"), gpp.table)];
                        let mut tc = t_cell.borrow_mut();
                        let (tt, rt) = &mut *tc;
                        let tab = std::rc::Rc::new(rt(ex_ref, tt, *si, &iota));
                        memo.borrow_mut().insert(key, (base, tab.clone()));
                        (base, tab)
                    }
                };
                ex_ref.elem_class[dom][base + tab[*xi]]
            },
            trunc,
        )
    };
    ex.class_cell = (0..=budget.max_dim).map(|k| (0..ex.reps[k].len()).map(|c| lb.normal[k][&c]).collect()).collect();
    ex.nd_class = lb.nondeg.clone();
    ex.level_sizes = ex.reps.iter().map(|r| r.len()).collect();
    ex.presheaf = lb.presheaf;
    Ok(ex)
}

/// ex C for a finite cubical set C.
pub fn ex(c: &Presheaf<Cube>, budget: CoendBudget) -> Result<Ex<Morphism>> {
    let mut t = PresheafTarget::new(c, budget.max_size.max(budget.max_dim));
    ex_with(&mut t, budget)
}

/// ex C computed at the given budget and one size step larger; `stable` is
/// set when the level sizes agree.
pub struct ExResult {
    pub ex: Ex<Morphism>,
    pub stable: bool,
}

pub fn ex_checked(c: &Presheaf<Cube>, budget: CoendBudget) -> Result<ExResult> {
    let a = ex(c, budget)?;
    let b = ex(c, CoendBudget { max_size: budget.max_size + 1, ..budget })?;
    let stable = a.level_sizes == b.level_sizes;
    Ok(ExResult { ex: a, stable })
}

/// υ_C: C → ex C, sending σ to the class of (⟦n⟧, σ, id).
pub fn upsilon(c: &Presheaf<Cube>, e: &Ex<Morphism>) -> Result<Morphism> {
    let mut t = PresheafTarget::new(c, e.budget.max_size.max(e.budget.max_dim));
    let top = c.top().min(e.budget.max_dim);
    if c.top() > e.budget.max_dim {
        return Err(Error::Invalid(format!("C has dimension {} above the stored {}", c.top(), e.budget.max_dim)));
    }
    let images = (0..=top)
        .map(|n| {
            c.cells(n)
                .map(|s| {
                    let l = Shape::cube(n);
                    let x = t.from_values(&l, |v| c.act(Cell::nd(s), &v.to_cube().expect("□-cell")));
                    e.cell_of(&mut t, &l, &x, &MonotoneMap::identity(&l))
                })
                .collect()
        })
        .collect();
    Ok(Morphism { images })
}

/// ζ_C: C → ex sd C, sending σ to the class of ([2]^n, σ's copy in sd C, i ↦ 2i).
pub fn zeta(c: &Presheaf<Cube>, sd: &SdCube, e: &Ex<Morphism>) -> Result<Morphism> {
    let sdc = sd.presheaf();
    if c.top() > e.budget.max_dim {
        return Err(Error::Invalid(format!("C has dimension {} above the stored {}", c.top(), e.budget.max_dim)));
    }
    if 2 * c.top() > e.budget.max_size {
        return Err(Error::Budget(format!("ζ needs [2]^{} but the size budget is {}", c.top(), e.budget.max_size)));
    }
    let mut t = PresheafTarget::new(sdc, e.budget.max_size.max(e.budget.max_dim));
    let images = (0..=c.top())
        .map(|n| {
            c.cells(n)
                .map(|s| {
                    let l = Shape(vec![2; n]);
                    let b = &sd.functor.builds[n];
                    let x = t.from_values(&l, |v| {
                        let y = b.cell(v.dom.len(), v).expect("⊞-cell of [2]^n");
                        sd.ext.cell_nd(s, y)
                    });
                    let g = MonotoneMap::from_coords(&Shape::cube(n), &l, |p| p.iter().map(|&i| 2 * i).collect());
                    e.cell_of(&mut t, &l, &x, &g)
                })
                .collect()
        })
        .collect();
    Ok(Morphism { images })
}

/// ex h: ex C → ex C', (L, x, g) ↦ (L, h∘x, g).
pub fn ex_morphism(h: &Morphism, c2: &Presheaf<Cube>, src: &Ex<Morphism>, tgt: &Ex<Morphism>) -> Morphism {
    let mut t2 = PresheafTarget::new(c2, tgt.budget.max_size.max(tgt.budget.max_dim));
    let p = &src.presheaf;
    let images = (0..=p.top())
        .map(|d| {
            p.cells(d)
                .map(|c| {
                    let (l, x, g) = src.rep(c);
                    let hx = Morphism { images: x.images.iter().map(|lv| lv.iter().map(|&y| h.apply(c2, y)).collect()).collect() };
                    tgt.cell_of(&mut t2, l, &hx, &g)
                })
                .collect()
        })
        .collect();
    Morphism { images }
}

/// ex^k C with the chain maps C → ex C → … → ex^k C.
pub struct ExTower {
    pub stages: Vec<Presheaf<Cube>>,
    pub exes: Vec<Ex<Morphism>>,
    pub chain: Vec<Morphism>,
    pub stable: Vec<bool>,
}

pub fn ex_iter(c: &Presheaf<Cube>, k: usize, budget: CoendBudget) -> Result<ExTower> {
    let mut stages = vec![c.clone()];
    let mut exes = Vec::new();
    let mut chain = Vec::new();
    let mut stable = Vec::new();
    for i in 0..k {
        let r = ex_checked(&stages[i], budget)?;
        chain.push(upsilon(&stages[i], &r.ex)?);
        stages.push(r.ex.presheaf.clone());
        stable.push(r.stable);
        exes.push(r.ex);
    }
    Ok(ExTower { stages, exes, chain, stable })
}

impl ExTower {
    /// υ_{ex^{k-1}C} ∘ … ∘ υ_C.
    pub fn composite(&self) -> Morphism {
        let mut m = Morphism::identity(&self.stages[0]);
        for (i, u) in self.chain.iter().enumerate() {
            m = m.then(u, &self.stages[i]);
        }
        m
    }
}

/// ex ner^□P together with the composition μ: ex ner^□P → ner^□P and υ.
pub struct NerveComposition {
    pub nerve: crate::presheaf::LevelBuild<Cube, Vec<u32>>,
    pub ex: Ex<Vec<u32>>,
    pub mu: Morphism,
    pub upsilon: Morphism,
}

pub fn nerve_composition(p: &Preorder, budget: CoendBudget) -> Result<NerveComposition> {
    let nerve = nerve_cubical(p, budget.max_dim);
    let mut t = NerveTarget { p: p.clone() };
    let e = ex_with(&mut t, budget)?;
    let exp = &e.presheaf;
    let mut mu_images = Vec::new();
    for d in 0..=exp.top() {
        let mut l = Vec::new();
        for c in exp.cells(d) {
            let (_, h, g) = e.rep(c);
            let hg: Vec<u32> = g.table.iter().map(|&q| h[q as usize]).collect();
            l.push(nerve.cell(d, &hg).ok_or_else(|| Error::Violation(format!("μ leaves the nerve at {c}")))?);
        }
        mu_images.push(l);
    }
    let mu = Morphism { images: mu_images };
    let np = &nerve.presheaf;
    let mut up_images = Vec::new();
    for n in 0..=np.top() {
        let l = Shape::cube(n);
        up_images.push(
            np.cells(n)
                .map(|s| {
                    let x = nerve.value(s).clone();
                    e.cell_of(&mut t, &l, &x, &MonotoneMap::identity(&l))
                })
                .collect(),
        );
    }
    let upsilon = Morphism { images: up_images };
    Ok(NerveComposition { nerve, ex: e, mu, upsilon })
}

impl NerveComposition {
    /// μ is a cubical function and μ∘υ = id.
    pub fn verify(&self) -> Result<()> {
        let np = &self.nerve.presheaf;
        if !self.mu.verify(&self.ex.presheaf, np) {
            return Err(Error::Violation("μ is not a cubical function".into()));
        }
        if !self.upsilon.verify(np, &self.ex.presheaf) {
            return Err(Error::Violation("υ is not a cubical function".into()));
        }
        let id = self.upsilon.then(&self.mu, &self.ex.presheaf);
        if id != Morphism::identity(np) {
            return Err(Error::Violation("μ∘υ is not the identity".into()));
        }
        Ok(())
    }
}

/// μ: ex ner^□P → ner^□P when ex was computed from the nerve as a cubical
/// set: (L, x, g) ↦ the cell whose vertex values are x(g(p)).
pub fn nerve_mu(nerve: &LevelBuild<Cube, Vec<u32>>, e: &Ex<Morphism>) -> Result<Morphism> {
    let np = &nerve.presheaf;
    let mut t = PresheafTarget::new(np, e.budget.max_size.max(e.budget.max_dim));
    let exp = &e.presheaf;
    let mut images = Vec::new();
    for d in 0..=exp.top() {
        let mut l = Vec::new();
        for c in exp.cells(d) {
            let (shape, x, g) = e.rep(c);
            let at = |t: &mut PresheafTarget, q: u32| -> u32 {
                let v = MonotoneMap { dom: Shape::cube(0), cod: shape.clone(), table: vec![q] };
                let cell = t.eval(x, &v);
                nerve.value(cell.base)[0]
            };
            let values: Vec<u32> = g.table.iter().map(|&q| at(&mut t, q)).collect();
            l.push(nerve.cell(d, &values).ok_or_else(|| Error::Violation(format!("μ leaves the nerve at {c}")))?);
        }
        images.push(l);
    }
    Ok(Morphism { images })
}

/// Compares ex □⟦n⟧ with ner^□⟦n⟧ through (⟦n⟧, id, g) ↤ g. Returns the
/// level sizes of both sides; errors describe the first mismatch.
pub fn ex_representable_check(n: usize, budget: CoendBudget) -> Result<(Vec<usize>, Vec<usize>)> {
    let rep = crate::presheaf::representable::<Cube>(n).presheaf;
    let r = ex_checked(&rep, budget)?;
    let e = &r.ex;
    let nerve = nerve_cubical(&Shape::cube(n).preorder(), budget.max_dim);
    let mut t = PresheafTarget::new(&rep, budget.max_size.max(budget.max_dim));
    let l = Shape::cube(n);
    let idx = t.from_values(&l, |v| rep.act(Cell::nd(CellId::new(n, 0)), &v.to_cube().unwrap()));
    let nerve_sizes: Vec<usize> = (0..=budget.max_dim).map(|k| nerve.presheaf.level(k).len()).collect();
    let ex_sizes: Vec<usize> = (0..=budget.max_dim).map(|k| e.presheaf.level(k).len()).collect();
    if !r.stable {
        return Err(Error::Budget(format!("ex □⟦{n}⟧ not stable at size {}", budget.max_size)));
    }
    for k in 0..=budget.max_dim {
        let mut hit = std::collections::HashSet::new();
        for y in nerve.presheaf.level(k) {
            let g = nerve.nondeg[y.base.dim][y.base.idx].clone();
            let g = MonotoneMap { dom: Shape::cube(y.base.dim), cod: l.clone(), table: g };
            let g = MonotoneMap::from_cube(&Cube::surj_from_code(y.level, y.code)).then(&g);
            hit.insert(e.cell_of(&mut t, &l, &idx, &g));
        }
        if hit.len() != nerve_sizes[k] || hit.len() != ex_sizes[k] {
            return Err(Error::Violation(format!(
                "ex □⟦{n}⟧ level {k}: nerve has {}, ex has {}, comparison hits {}",
                nerve_sizes[k],
                ex_sizes[k],
                hit.len()
            )));
        }
    }
    Ok((nerve_sizes, ex_sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;

    #[test]
    fn spans_restrict_to_intervals() {
        let l = Shape(vec![3, 2]);
        let g = MonotoneMap::from_coords(&Shape::cube(1), &l, |x| vec![1 + x[0], 2]);
        let (lpp, iota, gpp) = span(&g);
        assert_eq!(lpp, Shape(vec![1]));
        assert_eq!(gpp.then(&iota), g);
    }

    #[test]
    fn ex_of_point_and_interval() {
        let b = CoendBudget { max_size: 3, max_dim: 2 };
        let pt = ex_checked(&representable::<Cube>(0).presheaf, b).unwrap();
        assert!(pt.stable);
        assert_eq!(pt.ex.presheaf.counts(), vec![1]);
        let (nerve, exs) = ex_representable_check(1, b).unwrap();
        assert_eq!(nerve, exs);
    }

    #[test]
    fn composition_on_small_nerves() {
        for p in Preorder::all_on(2) {
            nerve_composition(&p, CoendBudget { max_size: 3, max_dim: 2 }).unwrap().verify().unwrap();
        }
    }
}
