//! Presheaf morphisms and their enumeration by backtracking.

use super::{Cell, CellId, Presheaf};
use crate::error::{Error, Result};
use crate::site::Site;
use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::ControlFlow;

/// Assignment of a target cell (at the same level) to every nondegenerate source cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub images: Vec<Vec<Cell>>,
}

impl Morphism {
    pub fn image(&self, c: CellId) -> Cell {
        self.images[c.dim][c.idx]
    }

    pub fn apply<S: Site>(&self, target: &Presheaf<S>, x: Cell) -> Cell {
        let y = self.image(x.base);
        target.act(y, &S::surj_from_code(x.level, x.code))
    }

    pub fn identity<S: Site>(p: &Presheaf<S>) -> Morphism {
        Morphism { images: (0..=p.top()).map(|d| p.cells(d).map(Cell::nd).collect()).collect() }
    }

    /// The constant morphism at a target vertex.
    pub fn constant<S: Site>(src: &Presheaf<S>, vertex: usize) -> Morphism {
        Morphism { images: (0..=src.top()).map(|d| src.cells(d).map(|_| Cell::point(vertex, d)).collect()).collect() }
    }

    /// self followed by g, where self lands in `mid`.
    pub fn then<S: Site>(&self, g: &Morphism, mid: &Presheaf<S>) -> Morphism {
        Morphism { images: self.images.iter().map(|l| l.iter().map(|&x| g.apply(mid, x)).collect()).collect() }
    }

    /// Checks shape and commutation with every elementary face.
    pub fn verify<S: Site>(&self, src: &Presheaf<S>, tgt: &Presheaf<S>) -> bool {
        for d in 0..=src.top() {
            if self.images.get(d).map_or(0, |l| l.len()) != src.count(d) {
                return false;
            }
            for c in src.cells(d) {
                let y = self.image(c);
                if y.level != d || y.base.idx >= tgt.count(y.base.dim) {
                    return false;
                }
                for i in 0..S::face_count(d) {
                    if tgt.act(y, &S::face(d, i)) != self.apply(tgt, src.face(c, i)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Like [`Morphism::verify`], naming the first offending cell.
    pub fn check<S: Site>(&self, src: &Presheaf<S>, tgt: &Presheaf<S>) -> Result<()> {
        for d in 0..=src.top() {
            let have = self.images.get(d).map_or(0, |l| l.len());
            if have != src.count(d) {
                return Err(Error::Invalid(format!("dimension {d}: {have} images for {} cells", src.count(d))));
            }
            for c in src.cells(d) {
                let y = self.image(c);
                if y.level != d || y.base.dim > d || y.base.idx >= tgt.count(y.base.dim) {
                    return Err(Error::Invalid(format!("image of cell ({d},{}) is not a level-{d} cell of the target", c.idx)));
                }
                for i in 0..S::face_count(d) {
                    if tgt.act(y, &S::face(d, i)) != self.apply(tgt, src.face(c, i)) {
                        return Err(Error::Invalid(format!("image of cell ({d},{}) does not commute with face {i}", c.idx)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Injective on all cells (Eilenberg–Zilber: nondegenerate images, pairwise distinct).
    pub fn is_mono(&self) -> bool {
        let mut seen = HashSet::new();
        self.images.iter().flatten().all(|y| y.code == 0 && seen.insert(y.base))
    }

    pub fn is_epi<S: Site>(&self, tgt: &Presheaf<S>) -> bool {
        let hit: HashSet<CellId> = self.images.iter().flatten().map(|y| y.base).collect();
        tgt.all_cells().all(|c| hit.contains(&c))
    }

    pub fn is_iso<S: Site>(&self, tgt: &Presheaf<S>) -> bool {
        self.is_mono() && self.is_epi(tgt)
    }
}

/// Knobs for [`for_each_morphism`].
pub struct SearchOptions<'a> {
    /// Abort with [`Error::Budget`] after this many search nodes.
    pub node_budget: usize,
    /// Fixed images for some source cells.
    pub pinned: Vec<(CellId, Cell)>,
    /// Extra filter on candidate images.
    pub allow: Option<Box<dyn Fn(CellId, Cell) -> bool + 'a>>,
    /// Only nondegenerate, dimension-preserving, pairwise distinct images.
    pub injective: bool,
}

impl Default for SearchOptions<'_> {
    fn default() -> Self {
        SearchOptions { node_budget: 50_000_000, pinned: vec![], allow: None, injective: false }
    }
}

/// Order in which nondegenerate source cells are decided: vertices in
/// breadth-first order, each higher cell as soon as its faces are decided.
fn schedule<S: Site>(src: &Presheaf<S>) -> Vec<CellId> {
    let nv = src.count(0);
    let mut adj = vec![Vec::new(); nv];
    for e in src.cells(1) {
        let vs = src.vertices(Cell::nd(e));
        for &a in &vs {
            for &b in &vs {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    let higher: Vec<CellId> = (1..=src.top()).flat_map(|d| src.cells(d)).collect();
    let mut done: HashSet<CellId> = HashSet::new();
    let mut placed = vec![false; higher.len()];
    let mut order = Vec::with_capacity(src.total());
    let mut seen = vec![false; nv];
    for root in 0..nv {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            let vid = CellId::new(0, v);
            order.push(vid);
            done.insert(vid);
            loop {
                let mut progress = false;
                for (k, &c) in higher.iter().enumerate() {
                    if !placed[k] && src.faces_of(c).iter().all(|f| done.contains(&f.base)) {
                        placed[k] = true;
                        done.insert(c);
                        order.push(c);
                        progress = true;
                    }
                }
                if !progress {
                    break;
                }
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    order
}

/// Streams every morphism `src → tgt` to `visit`, in a deterministic order.
pub fn for_each_morphism<S: Site>(
    src: &Presheaf<S>,
    tgt: &Presheaf<S>,
    opts: &SearchOptions,
    mut visit: impl FnMut(&Morphism) -> ControlFlow<()>,
) -> Result<()> {
    if let (Some(d), Some(t)) = (src.dim(), tgt.truncation()) {
        if d > t {
            return Err(Error::Invalid(format!("source dimension {d} exceeds target truncation {t}")));
        }
    }
    let order = schedule(src);
    let top = src.top();
    // candidates at each level, keyed by their face tuple
    let mut index: Vec<HashMap<Vec<Cell>, Vec<Cell>>> = vec![HashMap::new(); top + 1];
    let mut verts: Vec<Cell> = Vec::new();
    for d in 0..=top {
        if src.count(d) == 0 {
            continue;
        }
        for y in tgt.level(d) {
            if opts.injective && (y.code != 0 || y.base.dim != d) {
                continue;
            }
            if d == 0 {
                verts.push(y);
            } else {
                let key: Vec<Cell> = (0..S::face_count(d)).map(|i| tgt.act(y, &S::face(d, i))).collect();
                index[d].entry(key).or_default().push(y);
            }
        }
    }
    for l in index.iter_mut() {
        for v in l.values_mut() {
            v.sort();
        }
    }
    verts.sort();
    let pins: HashMap<CellId, Cell> = opts.pinned.iter().copied().collect();
    let mut images: Vec<Vec<Cell>> =
        (0..=top).map(|d| vec![Cell::point(0, d); src.count(d)]).collect();
    let mut used: HashSet<CellId> = HashSet::new();
    let mut nodes = 0usize;

    struct Ctx<'a, 'o, S: Site> {
        src: &'a Presheaf<S>,
        tgt: &'a Presheaf<S>,
        order: &'a [CellId],
        index: &'a [HashMap<Vec<Cell>, Vec<Cell>>],
        verts: &'a [Cell],
        pins: &'a HashMap<CellId, Cell>,
        opts: &'a SearchOptions<'o>,
    }

    fn rec<S: Site>(
        ctx: &Ctx<S>,
        pos: usize,
        images: &mut Vec<Vec<Cell>>,
        used: &mut HashSet<CellId>,
        nodes: &mut usize,
        visit: &mut dyn FnMut(&Morphism) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        *nodes += 1;
        if *nodes > ctx.opts.node_budget {
            return Err(Error::Budget(format!("morphism search exceeded {} nodes", ctx.opts.node_budget)));
        }
        if pos == ctx.order.len() {
            return Ok(visit(&Morphism { images: images.clone() }));
        }
        let c = ctx.order[pos];
        let empty = Vec::new();
        let cands: &Vec<Cell> = if c.dim == 0 {
            // borrow as Vec for uniform handling
            return rec_vertices(ctx, pos, c, images, used, nodes, visit);
        } else {
            let key: Vec<Cell> = ctx
                .src
                .faces_of(c)
                .iter()
                .map(|&f| Morphism::apply_images(images, ctx.tgt, f))
                .collect();
            ctx.index[c.dim].get(&key).unwrap_or(&empty)
        };
        for &y in cands {
            if !admissible(ctx, c, y, used) {
                continue;
            }
            images[c.dim][c.idx] = y;
            if ctx.opts.injective {
                used.insert(y.base);
            }
            let r = rec(ctx, pos + 1, images, used, nodes, visit)?;
            if ctx.opts.injective {
                used.remove(&y.base);
            }
            if r.is_break() {
                return Ok(r);
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn admissible<S: Site>(ctx: &Ctx<S>, c: CellId, y: Cell, used: &HashSet<CellId>) -> bool {
        if let Some(&p) = ctx.pins.get(&c) {
            if p != y {
                return false;
            }
        }
        if ctx.opts.injective && used.contains(&y.base) {
            return false;
        }
        ctx.opts.allow.as_ref().is_none_or(|a| a(c, y))
    }

    fn rec_vertices<S: Site>(
        ctx: &Ctx<S>,
        pos: usize,
        c: CellId,
        images: &mut Vec<Vec<Cell>>,
        used: &mut HashSet<CellId>,
        nodes: &mut usize,
        visit: &mut dyn FnMut(&Morphism) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        for &y in ctx.verts {
            if !admissible(ctx, c, y, used) {
                continue;
            }
            images[0][c.idx] = y;
            if ctx.opts.injective {
                used.insert(y.base);
            }
            let r = rec(ctx, pos + 1, images, used, nodes, visit)?;
            if ctx.opts.injective {
                used.remove(&y.base);
            }
            if r.is_break() {
                return Ok(r);
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    let ctx = Ctx { src, tgt, order: &order, index: &index, verts: &verts, pins: &pins, opts };
    let _ = rec(&ctx, 0, &mut images, &mut used, &mut nodes, &mut visit)?;
    Ok(())
}

impl Morphism {
    fn apply_images<S: Site>(images: &[Vec<Cell>], tgt: &Presheaf<S>, x: Cell) -> Cell {
        let y = images[x.base.dim][x.base.idx];
        tgt.act(y, &S::surj_from_code(x.level, x.code))
    }
}

pub fn enumerate_morphisms<S: Site>(src: &Presheaf<S>, tgt: &Presheaf<S>, opts: &SearchOptions) -> Result<Vec<Morphism>> {
    let mut out = Vec::new();
    for_each_morphism(src, tgt, opts, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Some isomorphism `a → b`, if one exists.
pub fn find_isomorphism<S: Site>(a: &Presheaf<S>, b: &Presheaf<S>) -> Option<Morphism> {
    if a.counts() != b.counts() {
        return None;
    }
    let opts = SearchOptions { injective: true, ..Default::default() };
    let mut found = None;
    for_each_morphism(a, b, &opts, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    })
    .ok()?;
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;
    use crate::site::{Cube, Simplex};

    #[test]
    fn yoneda_counts() {
        let i = representable::<Cube>(1).presheaf;
        assert_eq!(enumerate_morphisms(&i, &i, &SearchOptions::default()).unwrap().len(), 3);
        let d1 = representable::<Simplex>(1).presheaf;
        let d2 = representable::<Simplex>(2).presheaf;
        assert_eq!(enumerate_morphisms(&d1, &d2, &SearchOptions::default()).unwrap().len(), 6);
        let sq = representable::<Cube>(2).presheaf;
        for m in enumerate_morphisms(&sq, &sq, &SearchOptions::default()).unwrap() {
            assert!(m.verify(&sq, &sq));
        }
        assert_eq!(enumerate_morphisms(&sq, &sq, &SearchOptions::default()).unwrap().len(), Cube::hom(2, 2).len());
    }
}
