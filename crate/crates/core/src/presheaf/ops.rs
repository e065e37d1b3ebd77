//! Tensor, Cartesian product and coproduct.

use super::{from_levels, Cell, CellId, LevelBuild, Morphism, Presheaf};
use crate::site::{Cube, Site};
use std::collections::HashMap;

/// B ⊗ C for cubical sets. Nondegenerate (p+q)-cells are pairs of
/// nondegenerate p- and q-cells; the first p coordinates belong to B.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub presheaf: Presheaf<Cube>,
    pub pairs: Vec<Vec<(CellId, CellId)>>,
    lookup: HashMap<(CellId, CellId), usize>,
}

impl Tensor {
    pub fn new(b: &Presheaf<Cube>, c: &Presheaf<Cube>) -> Tensor {
        let top = if b.is_empty() || c.is_empty() { 0 } else { b.top() + c.top() };
        let mut pairs: Vec<Vec<(CellId, CellId)>> = vec![Vec::new(); top + 1];
        let mut lookup = HashMap::new();
        for n in 0..=top {
            for p in 0..=n.min(b.top()) {
                if n - p > c.top() {
                    continue;
                }
                for x in b.cells(p) {
                    for y in c.cells(n - p) {
                        lookup.insert((x, y), pairs[n].len());
                        pairs[n].push((x, y));
                    }
                }
            }
        }
        let pair_cell = |x: Cell, y: Cell| -> Cell {
            let idx = lookup[&(x.base, y.base)];
            Cell { level: x.level + y.level, code: x.code | (y.code << x.level), base: CellId::new(x.base.dim + y.base.dim, idx) }
        };
        let faces = pairs
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&(x, y)| {
                        let (p, q) = (x.dim, y.dim);
                        let mut fs = Vec::with_capacity(2 * (p + q));
                        for i in 0..p + q {
                            for e in 0..2 {
                                fs.push(if i < p {
                                    pair_cell(b.face(x, 2 * i + e), Cell::nd(y))
                                } else {
                                    pair_cell(Cell::nd(x), c.face(y, 2 * (i - p) + e))
                                });
                            }
                        }
                        fs
                    })
                    .collect()
            })
            .collect();
        let presheaf = Presheaf::from_faces(faces, None).expect("tensor faces");
        Tensor { presheaf, pairs, lookup }
    }

    /// x ⊗ y for cells of the factors.
    pub fn pair_cell(&self, x: Cell, y: Cell) -> Cell {
        let idx = self.lookup[&(x.base, y.base)];
        Cell { level: x.level + y.level, code: x.code | (y.code << x.level), base: CellId::new(x.base.dim + y.base.dim, idx) }
    }

    /// f ⊗ g, landing in `target = B' ⊗ C'`.
    pub fn tensor_morphism(&self, f: &Morphism, g: &Morphism, target: &Tensor) -> Morphism {
        Morphism {
            images: self.pairs.iter().map(|l| l.iter().map(|&(x, y)| target.pair_cell(f.image(x), g.image(y))).collect()).collect(),
        }
    }

    /// Inclusion of `B ⊗ {v}` or `{v} ⊗ C` as a morphism out of B (resp. C),
    /// where `fixed` is a vertex of the other factor.
    pub fn slice_left(&self, b: &Presheaf<Cube>, fixed_c_vertex: usize) -> Morphism {
        Morphism {
            images: (0..=b.top())
                .map(|d| b.cells(d).map(|x| self.pair_cell(Cell::nd(x), Cell::nd(CellId::new(0, fixed_c_vertex)))).collect())
                .collect(),
        }
    }
    pub fn slice_right(&self, c: &Presheaf<Cube>, fixed_b_vertex: usize) -> Morphism {
        Morphism {
            images: (0..=c.top())
                .map(|d| c.cells(d).map(|y| self.pair_cell(Cell::nd(CellId::new(0, fixed_b_vertex)), Cell::nd(y))).collect())
                .collect(),
        }
    }
}

/// Cartesian product, computed levelwise. Returns the pair dictionary too.
pub fn product<S: Site>(b: &Presheaf<S>, c: &Presheaf<S>) -> LevelBuild<S, (Cell, Cell)> {
    let top = if b.is_empty() || c.is_empty() { 0 } else { b.top() + c.top() };
    let levels = (0..=top)
        .map(|k| {
            let (lb, lc) = (b.level(k), c.level(k));
            lb.iter().flat_map(|&x| lc.iter().map(move |&y| (x, y))).collect()
        })
        .collect();
    from_levels::<S, _, _>(levels, |_, &(x, y), f| (b.act(x, f), c.act(y, f)), None)
}

/// B ⊔ C with its two inclusions.
pub struct Coproduct<S: Site> {
    pub presheaf: Presheaf<S>,
    pub left: Morphism,
    pub right: Morphism,
}

pub fn coproduct<S: Site>(b: &Presheaf<S>, c: &Presheaf<S>) -> Coproduct<S> {
    let top = b.top().max(c.top());
    let shift = |x: Cell| Cell { base: CellId::new(x.base.dim, x.base.idx + b.count(x.base.dim)), ..x };
    let faces: Vec<Vec<Vec<Cell>>> = (0..=top)
        .map(|d| {
            let mut l: Vec<Vec<Cell>> = b.cells(d).map(|x| b.faces_of(x).to_vec()).collect();
            l.extend(c.cells(d).map(|y| c.faces_of(y).iter().map(|&f| shift(f)).collect()));
            l
        })
        .collect();
    let presheaf = Presheaf::from_faces(faces, None).expect("coproduct faces");
    let left = Morphism { images: (0..=b.top()).map(|d| b.cells(d).map(Cell::nd).collect()).collect() };
    let right = Morphism { images: (0..=c.top()).map(|d| c.cells(d).map(|y| shift(Cell::nd(y))).collect()).collect() };
    Coproduct { presheaf, left, right }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::{find_isomorphism, representable};
    use crate::site::Simplex;

    #[test]
    fn interval_squared_is_square() {
        let i = representable::<Cube>(1).presheaf;
        let t = Tensor::new(&i, &i);
        t.presheaf.check().unwrap();
        let sq = representable::<Cube>(2).presheaf;
        assert!(find_isomorphism(&t.presheaf, &sq).is_some());
    }

    #[test]
    fn tensor_unit() {
        let pt = representable::<Cube>(0).presheaf;
        let sq = representable::<Cube>(2).presheaf;
        let t = Tensor::new(&sq, &pt);
        assert!(find_isomorphism(&t.presheaf, &sq).is_some());
    }

    #[test]
    fn simplicial_prism() {
        let d1 = representable::<Simplex>(1).presheaf;
        let p = product(&d1, &d1).presheaf;
        assert_eq!(p.counts(), vec![4, 5, 2]);
        p.check().unwrap();
    }
}
