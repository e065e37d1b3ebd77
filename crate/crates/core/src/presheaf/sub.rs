//! Subpresheaves as face-closed sets of nondegenerate cells.

use super::{Cell, CellId, Morphism, Presheaf};
use crate::error::{Error, Result};
use crate::site::Site;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sub {
    pub mask: Vec<Vec<bool>>,
}

impl Sub {
    pub fn empty<S: Site>(p: &Presheaf<S>) -> Sub {
        Sub { mask: (0..=p.top()).map(|d| vec![false; p.count(d)]).collect() }
    }
    pub fn full<S: Site>(p: &Presheaf<S>) -> Sub {
        Sub { mask: (0..=p.top()).map(|d| vec![true; p.count(d)]).collect() }
    }
    pub fn contains(&self, c: CellId) -> bool {
        self.mask.get(c.dim).and_then(|l| l.get(c.idx)).copied().unwrap_or(false)
    }
    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.mask
            .iter()
            .enumerate()
            .flat_map(|(d, l)| l.iter().enumerate().filter(|(_, b)| **b).map(move |(i, _)| CellId::new(d, i)))
    }
    pub fn len(&self) -> usize {
        self.mask.iter().flatten().filter(|b| **b).count()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn counts(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.mask.iter().map(|l| l.iter().filter(|b| **b).count()).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    }
    pub fn dim(&self) -> Option<usize> {
        self.cells().map(|c| c.dim).max()
    }

    /// Adds a cell together with all of its faces.
    pub fn insert_closed<S: Site>(&mut self, p: &Presheaf<S>, c: CellId) {
        let mut stack = vec![c];
        while let Some(x) = stack.pop() {
            if self.mask[x.dim][x.idx] {
                continue;
            }
            self.mask[x.dim][x.idx] = true;
            stack.extend(p.faces_of(x).iter().map(|f| f.base));
        }
    }

    /// ⟨σ⟩, the smallest subpresheaf containing σ.
    pub fn hull<S: Site>(p: &Presheaf<S>, c: CellId) -> Sub {
        let mut s = Sub::empty(p);
        s.insert_closed(p, c);
        s
    }

    pub fn generated<S: Site>(p: &Presheaf<S>, cells: impl IntoIterator<Item = CellId>) -> Sub {
        let mut s = Sub::empty(p);
        for c in cells {
            s.insert_closed(p, c);
        }
        s
    }

    pub fn is_closed<S: Site>(&self, p: &Presheaf<S>) -> bool {
        self.cells().all(|c| p.faces_of(c).iter().all(|f| self.contains(f.base)))
    }

    pub fn union(&self, o: &Sub) -> Sub {
        Sub { mask: self.mask.iter().zip(&o.mask).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x || *y).collect()).collect() }
    }
    pub fn intersection(&self, o: &Sub) -> Sub {
        Sub { mask: self.mask.iter().zip(&o.mask).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x && *y).collect()).collect() }
    }
    pub fn is_subset(&self, o: &Sub) -> bool {
        self.cells().all(|c| o.contains(c))
    }

    /// The generating cell, when this subpresheaf is atomic.
    pub fn atom<S: Site>(&self, p: &Presheaf<S>) -> Option<CellId> {
        let d = self.dim()?;
        let tops: Vec<CellId> = self.cells().filter(|c| c.dim == d).collect();
        (tops.len() == 1 && Sub::hull(p, tops[0]) == *self).then(|| tops[0])
    }

    /// ∂A: the unique maximal proper subpresheaf of an atomic A.
    pub fn boundary<S: Site>(&self, p: &Presheaf<S>) -> Result<Sub> {
        let a = self.atom(p).ok_or_else(|| Error::Invalid("boundary of a non-atomic subpresheaf".into()))?;
        let mut s = self.clone();
        s.mask[a.dim][a.idx] = false;
        Ok(s)
    }

    /// Union of all atomic subpresheaves meeting `self`.
    pub fn star<S: Site>(&self, p: &Presheaf<S>) -> Sub {
        let mut s = Sub::empty(p);
        for c in p.all_cells() {
            if p.vertices(Cell::nd(c)).iter().any(|&v| self.contains(CellId::new(0, v))) {
                s.insert_closed(p, c);
            }
        }
        s
    }

    /// The subpresheaf as a presheaf, with its inclusion and the old-to-new index map.
    pub fn as_presheaf<S: Site>(&self, p: &Presheaf<S>) -> (Presheaf<S>, Morphism, Vec<Vec<Option<usize>>>) {
        let mut remap: Vec<Vec<Option<usize>>> = self.mask.iter().map(|l| vec![None; l.len()]).collect();
        let mut incl: Vec<Vec<Cell>> = vec![Vec::new(); self.mask.len()];
        for (d, l) in self.mask.iter().enumerate() {
            for (i, &b) in l.iter().enumerate() {
                if b {
                    remap[d][i] = Some(incl[d].len());
                    incl[d].push(Cell::nd(CellId::new(d, i)));
                }
            }
        }
        let faces = incl
            .iter()
            .map(|l| {
                l.iter()
                    .map(|c| {
                        p.faces_of(c.base)
                            .iter()
                            .map(|f| Cell { base: CellId::new(f.base.dim, remap[f.base.dim][f.base.idx].expect("not face-closed")), ..*f })
                            .collect()
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let q = Presheaf::from_faces(faces, p.truncation()).expect("subpresheaf faces");
        let mut images = incl;
        images.truncate(q.top() + 1);
        while images.len() < q.top() + 1 {
            images.push(vec![]);
        }
        (q, Morphism { images }, remap)
    }

    /// Image of a morphism.
    pub fn image<S: Site>(m: &Morphism, src: &Presheaf<S>, tgt: &Presheaf<S>) -> Sub {
        Sub::generated(tgt, src.all_cells().map(|c| m.image(c).base))
    }

    /// Preimage of a subpresheaf along a morphism.
    pub fn preimage<S: Site>(&self, m: &Morphism, src: &Presheaf<S>) -> Sub {
        let mut s = Sub::empty(src);
        for c in src.all_cells() {
            if self.contains(m.image(c).base) {
                s.mask[c.dim][c.idx] = true;
            }
        }
        s
    }
}

/// All subpresheaves of a small presheaf, smallest first. Errors above the cap.
pub fn enumerate_subpresheaves<S: Site>(p: &Presheaf<S>, cap: usize) -> Result<Vec<Sub>> {
    let cells: Vec<CellId> = p.all_cells().collect();
    let mut out = vec![Sub::empty(p)];
    // cells are ordered by dimension, so every closed set arises from exactly one increasing sequence
    fn rec<S: Site>(p: &Presheaf<S>, cells: &[CellId], from: usize, cur: &mut Sub, out: &mut Vec<Sub>, cap: usize) -> Result<()> {
        for k in from..cells.len() {
            let c = cells[k];
            if cur.contains(c) || !p.faces_of(c).iter().all(|f| cur.contains(f.base)) {
                continue;
            }
            cur.mask[c.dim][c.idx] = true;
            out.push(cur.clone());
            if out.len() > cap {
                return Err(Error::SizeCap(format!("more than {cap} subpresheaves")));
            }
            rec(p, cells, k + 1, cur, out, cap)?;
            cur.mask[c.dim][c.idx] = false;
        }
        Ok(())
    }
    let mut cur = Sub::empty(p);
    rec(p, &cells, 0, &mut cur, &mut out, cap)?;
    out.sort_by_key(|s| s.len());
    Ok(out)
}

/// C/B: the cells outside B plus one vertex standing for B.
pub struct Quotient<S: Site> {
    pub presheaf: Presheaf<S>,
    pub projection: Morphism,
}

impl<S: Site> Quotient<S> {
    pub fn new(p: &Presheaf<S>, b: &Sub) -> Quotient<S> {
        let mut remap: Vec<Vec<Option<usize>>> = (0..=p.top()).map(|d| vec![None; p.count(d)]).collect();
        let mut kept: Vec<Vec<CellId>> = vec![Vec::new(); p.top() + 1];
        kept[0].push(CellId::new(0, usize::MAX));
        for c in p.all_cells() {
            if !b.contains(c) {
                remap[c.dim][c.idx] = Some(kept[c.dim].len());
                kept[c.dim].push(c);
            }
        }
        let map_cell = |x: Cell| -> Cell {
            match remap[x.base.dim][x.base.idx] {
                Some(i) => Cell { base: CellId::new(x.base.dim, i), ..x },
                None => Cell::point(0, x.level),
            }
        };
        let faces = kept
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&c| if c.idx == usize::MAX { vec![] } else { p.faces_of(c).iter().map(|&f| map_cell(f)).collect() })
                    .collect::<Vec<Vec<Cell>>>()
            })
            .collect::<Vec<_>>();
        let presheaf = Presheaf::from_faces(faces, p.truncation()).expect("quotient faces");
        let projection = Morphism { images: (0..=p.top()).map(|d| p.cells(d).map(|c| map_cell(Cell::nd(c))).collect()).collect() };
        Quotient { presheaf, projection }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;
    use crate::site::Cube;

    #[test]
    fn boundary_of_square() {
        let sq = representable::<Cube>(2).presheaf;
        let top = Sub::hull(&sq, CellId::new(2, 0));
        assert_eq!(top.boundary(&sq).unwrap().counts(), vec![4, 4]);
        // oracle: the maximum proper subpresheaf
        let subs = enumerate_subpresheaves(&sq, 10_000).unwrap();
        let proper_max = subs.iter().filter(|s| **s != Sub::full(&sq)).max_by_key(|s| s.len()).unwrap();
        assert_eq!(*proper_max, top.boundary(&sq).unwrap());
    }

    #[test]
    fn interval_mod_boundary() {
        let i = representable::<Cube>(1).presheaf;
        let b = Sub::hull(&i, CellId::new(1, 0)).boundary(&i).unwrap();
        let q = Quotient::new(&i, &b);
        assert_eq!(q.presheaf.counts(), vec![1, 1]);
        assert!(q.projection.verify(&i, &q.presheaf));
    }

    #[test]
    fn subpresheaf_census_of_interval() {
        let i = representable::<Cube>(1).presheaf;
        // ∅, {0}, {1}, {0,1}, all
        assert_eq!(enumerate_subpresheaves(&i, 100).unwrap().len(), 5);
    }
}
