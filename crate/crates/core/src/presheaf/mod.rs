//! Finite presheaves over a [`Site`], stored by nondegenerate cells.
//!
//! Every cell, degenerate or not, has a unique normal form `base · s` where
//! `base` is nondegenerate and `s` is a surjection, kept as a bit code. Only
//! the elementary faces of nondegenerate cells are stored; every other action
//! is derived by peeling faces off the injective part.

mod build;
mod colimit;
mod morphism;
mod ops;
mod sub;

pub use build::{from_levels, representable, LevelBuild};
pub use colimit::{extend, extend_morphism, extend_nat, Extension, LevelFunctor, RepFunctor};
pub use morphism::{enumerate_morphisms, find_isomorphism, for_each_morphism, Morphism, SearchOptions};
pub use ops::{coproduct, product, Coproduct, Tensor};
pub use sub::{enumerate_subpresheaves, Quotient, Sub};

use crate::error::{Error, Result};
use crate::site::{subsets_of_size, Site};
use std::marker::PhantomData;

/// Index of a nondegenerate cell: its dimension and position in that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub dim: usize,
    pub idx: usize,
}

impl CellId {
    pub fn new(dim: usize, idx: usize) -> Self {
        CellId { dim, idx }
    }
}

/// A cell in normal form: the nondegenerate `base` pulled back along the
/// surjection with bit code `code` out of level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub level: usize,
    pub code: u64,
    pub base: CellId,
}

impl Cell {
    pub fn nd(base: CellId) -> Cell {
        Cell { level: base.dim, code: 0, base }
    }
    pub fn is_nondegenerate(&self) -> bool {
        self.code == 0
    }
    /// The level-`level` degeneracy of a vertex.
    pub fn point(vertex: usize, level: usize) -> Cell {
        Cell { level, code: (1u64 << level) - 1, base: CellId::new(0, vertex) }
    }
}

impl std::fmt::Display for CellId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.dim, self.idx)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.code == 0 && self.level == self.base.dim {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{} degenerated to level {} by code {}", self.base, self.level, self.code)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf<S: Site> {
    counts: Vec<usize>,
    faces: Vec<Vec<Vec<Cell>>>,
    trunc: Option<usize>,
    _site: PhantomData<S>,
}

impl<S: Site> Presheaf<S> {
    /// Assembles a presheaf from face tables; `faces[d][idx]` lists the
    /// elementary faces of the cell `(d, idx)`.
    pub fn from_faces(faces: Vec<Vec<Vec<Cell>>>, trunc: Option<usize>) -> Result<Self> {
        let mut faces = faces;
        while faces.last().is_some_and(|l| l.is_empty()) && trunc.is_none_or(|t| faces.len() > t + 1) {
            faces.pop();
        }
        let counts = faces.iter().map(|l| l.len()).collect();
        let p = Presheaf { counts, faces, trunc, _site: PhantomData };
        p.validate()?;
        Ok(p)
    }

    pub fn empty() -> Self {
        Presheaf { counts: vec![], faces: vec![], trunc: None, _site: PhantomData }
    }

    fn validate(&self) -> Result<()> {
        for (d, cells) in self.faces.iter().enumerate() {
            for (idx, fs) in cells.iter().enumerate() {
                if fs.len() != S::face_count(d) {
                    return Err(Error::Invalid(format!("cell ({d},{idx}) has {} faces, expected {}", fs.len(), S::face_count(d))));
                }
                for (i, c) in fs.iter().enumerate() {
                    let ok = d > 0
                        && c.level == d - 1
                        && c.base.dim <= c.level
                        && c.base.idx < self.count(c.base.dim)
                        && c.code.count_ones() as usize == c.level - c.base.dim
                        && c.code >> c.level == 0;
                    if !ok {
                        return Err(Error::Invalid(format!("face {i} of cell ({d},{idx}) is malformed: {c}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Highest dimension with a nondegenerate cell; `None` for the empty presheaf.
    pub fn dim(&self) -> Option<usize> {
        (0..self.counts.len()).rev().find(|&d| self.counts[d] > 0)
    }
    /// Levels above this bound were not computed.
    pub fn truncation(&self) -> Option<usize> {
        self.trunc
    }
    pub fn top(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }
    pub fn count(&self, d: usize) -> usize {
        self.counts.get(d).copied().unwrap_or(0)
    }
    pub fn counts(&self) -> Vec<usize> {
        let mut c = self.counts.clone();
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    }
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
    pub fn cells(&self, d: usize) -> impl Iterator<Item = CellId> {
        (0..self.count(d)).map(move |i| CellId::new(d, i))
    }
    pub fn all_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.counts.len()).flat_map(move |d| self.cells(d))
    }
    pub fn face(&self, c: CellId, i: usize) -> Cell {
        self.faces[c.dim][c.idx][i]
    }
    pub fn faces_of(&self, c: CellId) -> &[Cell] {
        &self.faces[c.dim][c.idx]
    }

    /// x · f for f: [m] → [x.level].
    pub fn act(&self, x: Cell, f: &S::Map) -> Cell {
        debug_assert_eq!(S::cod(f), x.level);
        let s = S::surj_from_code(x.level, x.code);
        self.act_base(x.base, &S::compose(&s, f))
    }

    fn act_base(&self, base: CellId, g: &S::Map) -> Cell {
        let (s, d) = S::factor(g);
        match S::split_face(&d) {
            None => Cell { level: S::dom(&s), code: S::surj_code(&s), base },
            Some((i, rest)) => {
                let c = self.faces[base.dim][base.idx][i];
                self.act(c, &S::compose(&rest, &s))
            }
        }
    }

    /// All cells of level k, degenerate ones included.
    pub fn level(&self, k: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        for d in 0..=k.min(self.top()) {
            if self.count(d) == 0 {
                continue;
            }
            for code in subsets_of_size(k, k - d) {
                for c in self.cells(d) {
                    out.push(Cell { level: k, code, base: c });
                }
            }
        }
        out
    }

    /// Vertices of a cell, in the site's vertex order.
    pub fn vertices(&self, x: Cell) -> Vec<usize> {
        (0..S::vertex_count(x.level)).map(|p| self.act(x, &S::vertex(x.level, p)).base.idx).collect()
    }

    /// Re-derives every composite of two elementary faces in two ways.
    pub fn check(&self) -> Result<()> {
        for d in 2..self.counts.len() {
            for c in self.cells(d) {
                let x = Cell::nd(c);
                for i in 0..S::face_count(d) {
                    let fi = S::face(d, i);
                    let xi = self.act(x, &fi);
                    for j in 0..S::face_count(d - 1) {
                        let fj = S::face(d - 1, j);
                        let lhs = self.act(xi, &fj);
                        let rhs = self.act(x, &S::compose(&fi, &fj));
                        if lhs != rhs {
                            return Err(Error::Violation(format!("face identity fails at cell ({d},{}) faces {i},{j}", c.idx)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::{Cube, Simplex};

    #[test]
    fn representable_counts() {
        let sq = representable::<Cube>(2).presheaf;
        assert_eq!(sq.counts(), vec![4, 4, 1]);
        sq.check().unwrap();
        let tri = representable::<Simplex>(2).presheaf;
        assert_eq!(tri.counts(), vec![3, 3, 1]);
        let c3 = representable::<Cube>(3).presheaf;
        assert_eq!(c3.counts(), vec![8, 12, 6, 1]);
        c3.check().unwrap();
    }

    #[test]
    fn level_sizes_match_yoneda() {
        let sq = representable::<Cube>(2).presheaf;
        for k in 0..=3 {
            assert_eq!(sq.level(k).len(), Cube::hom(k, 2).len());
        }
        let d2 = representable::<Simplex>(2).presheaf;
        for k in 0..=4 {
            assert_eq!(d2.level(k).len(), Simplex::hom(k, 2).len());
        }
    }
}
