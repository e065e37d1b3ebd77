//! Chart-level geometry on realizations and the approximation algorithms.
//!
//! Points are written in barycentric coordinates of a simplex of a simplicial
//! set X, or in cube coordinates for cubical sources. Everything here is
//! generic over the scalar: `f64`/`f32` for sampling, `Ratio<i64>` for exact
//! dyadic charts.

use crate::error::{Error, Result};
use crate::extension::{ex, ex_morphism, nerve_mu, zeta, CoendBudget};
use crate::order::Preorder;
use crate::presheaf::{Cell, CellId, LevelBuild, Morphism, Presheaf, RepFunctor};
use crate::site::{Cube, OrdMap, Simplex, Site, SiteKind};
use crate::subdivision::{Subdividable, Subdivision, Tower};
use crate::triangulation::{nerve_cubical, transpose_right, tri, Qua, Tri};
use num_rational::Ratio;
use num_traits::Num;
use std::fmt::Debug;

/// Scalars usable for chart arithmetic.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// num / 2^log2_den.
    fn dyadic(num: i64, log2_den: u32) -> Self;
    /// Comparisons treat values within this distance as equal.
    fn tolerance() -> Self;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
    fn is_positive(&self) -> bool {
        *self > Self::tolerance()
    }
}

impl Scalar for f64 {
    fn dyadic(num: i64, log2_den: u32) -> Self {
        num as f64 / (1u64 << log2_den) as f64
    }
    fn tolerance() -> Self {
        1e-9
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn dyadic(num: i64, log2_den: u32) -> Self {
        num as f32 / (1u64 << log2_den) as f32
    }
    fn tolerance() -> Self {
        1e-5
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Ratio<i64> {
    fn dyadic(num: i64, log2_den: u32) -> Self {
        Ratio::new(num, 1i64 << log2_den)
    }
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

pub fn approx_eq<T: Scalar>(x: &[T], y: &[T]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a.clone() - b.clone()).abs_val() <= T::tolerance())
}

fn check_barycentric<T: Scalar>(x: &[T]) -> Result<()> {
    let tol = T::tolerance();
    let neg_tol = T::zero() - tol.clone();
    let sum = x.iter().cloned().fold(T::zero(), |a, b| a + b);
    if x.is_empty() || x.iter().any(|v| *v < neg_tol) || (sum - T::one()).abs_val() > tol {
        return Err(Error::Invalid(format!("not a normalized barycentric vector: {x:?}")));
    }
    Ok(())
}

/// S_k = Σ_{i≥k} x_i for k = 1..n; the lattice |Δ[n]| is {1 ≥ S_1 ≥ … ≥ S_n ≥ 0}
/// with the coordinatewise order.
pub fn tail_sums<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut s = vec![T::zero(); x.len()];
    let mut acc = T::zero();
    for i in (0..x.len()).rev() {
        acc = acc + x[i].clone();
        s[i] = acc.clone();
    }
    s.remove(0);
    s
}

fn from_tail_sums<T: Scalar>(s: &[T]) -> Vec<T> {
    let n = s.len();
    let at = |k: usize| if k == 0 { T::one() } else if k > n { T::zero() } else { s[k - 1].clone() };
    (0..=n).map(|k| at(k) - at(k + 1)).collect()
}

fn lattice_op<T: Scalar>(x: &[T], y: &[T], join: bool) -> Result<Vec<T>> {
    check_barycentric(x)?;
    check_barycentric(y)?;
    if x.len() != y.len() {
        return Err(Error::Invalid("points of simplices of different dimension".into()));
    }
    let (sx, sy) = (tail_sums(x), tail_sums(y));
    let s: Vec<T> = sx
        .into_iter()
        .zip(sy)
        .map(|(a, b)| if (a >= b) == join { a } else { b })
        .collect();
    Ok(from_tail_sums(&s))
}

pub fn simplex_join<T: Scalar>(x: &[T], y: &[T]) -> Result<Vec<T>> {
    lattice_op(x, y, true)
}

pub fn simplex_meet<T: Scalar>(x: &[T], y: &[T]) -> Result<Vec<T>> {
    lattice_op(x, y, false)
}

/// x ≤ y in |Δ[n]|.
pub fn simplex_leq<T: Scalar>(x: &[T], y: &[T]) -> Result<bool> {
    check_barycentric(x)?;
    check_barycentric(y)?;
    let tol = T::tolerance();
    Ok(tail_sums(x).into_iter().zip(tail_sums(y)).all(|(a, b)| a <= b + tol.clone()))
}

/// (x∨y)_k = Σ_{max(i,j)=k} x_i y_j. Kept for comparison: this is the law of
/// the larger of two independent draws and is not idempotent.
pub fn bilinear_join<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i.max(j)] = out[i.max(j)].clone() + a.clone() * b.clone();
        }
    }
    out
}

/// A point of |X| in its unique open cell: strictly positive coordinates over
/// a nondegenerate simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct GeomPoint<T> {
    pub cell: CellId,
    pub coords: Vec<T>,
}

impl<T: Scalar> GeomPoint<T> {
    /// Normalizes a point given in the closed chart of τ.
    pub fn from_chart(x: &Presheaf<Simplex>, tau: CellId, coords: &[T]) -> Result<Self> {
        check_barycentric(coords)?;
        if coords.len() != tau.dim + 1 {
            return Err(Error::Invalid(format!("{} coordinates for a {}-simplex", coords.len(), tau.dim)));
        }
        let support: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].is_positive()).collect();
        let face = OrdMap::new(tau.dim + 1, support.clone());
        let c = x.act(Cell::nd(tau), &face);
        let s = Simplex::surj_from_code(c.level, c.code);
        let mut merged = vec![T::zero(); c.base.dim + 1];
        for (i, &j) in s.table.iter().enumerate() {
            merged[j] = merged[j].clone() + coords[support[i]].clone();
        }
        Ok(GeomPoint { cell: c.base, coords: merged })
    }

    pub fn same_point(&self, o: &Self) -> bool {
        self.cell == o.cell && approx_eq(&self.coords, &o.coords)
    }
}

/// min supp({x}): the first vertex of the carrier simplex.
pub fn min_support_vertex<T>(x: &GeomPoint<T>, target: &Presheaf<Simplex>) -> usize {
    target.vertices(Cell::nd(x.cell))[0]
}

/// Position (in τ) of the first vertex carrying weight.
pub fn min_position<T: Scalar>(coords: &[T]) -> usize {
    coords.iter().position(|c| c.is_positive()).expect("normalized point has a positive coordinate")
}

/// Local coordinates of vertex p of a standard n-cell.
pub fn standard_vertex<S: Site, T: Scalar>(n: usize, p: usize) -> Vec<T> {
    match S::KIND {
        SiteKind::Simplex => (0..=n).map(|i| if i == p { T::one() } else { T::zero() }).collect(),
        SiteKind::Cube => (0..n).map(|i| if p >> i & 1 == 1 { T::one() } else { T::zero() }).collect(),
    }
}

/// The affine (simplicial) or multilinear (cubical) combination of the
/// vertex values `corners` at local coordinates `local`.
pub fn interpolate<S: Site, T: Scalar>(corners: &[Vec<T>], local: &[T]) -> Vec<T> {
    let len = corners[0].len();
    let mut out = vec![T::zero(); len];
    for (p, v) in corners.iter().enumerate() {
        let w = match S::KIND {
            SiteKind::Simplex => local[p].clone(),
            SiteKind::Cube => local.iter().enumerate().fold(T::one(), |acc, (i, u)| {
                acc * if p >> i & 1 == 1 { u.clone() } else { T::one() - u.clone() }
            }),
        };
        if w == T::zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + w.clone() * x.clone();
        }
    }
    out
}

/// Vertex positions of a top-stage cell of sd^k B inside its carrier in B.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiChart<T> {
    pub carrier: CellId,
    pub vertices: Vec<Vec<T>>,
}

/// Charts for every nondegenerate cell of every stage, by the midpoint rule.
pub fn phi_charts<S: Subdividable, T: Scalar>(tower: &Tower<S>) -> Vec<Vec<Vec<PhiChart<T>>>> {
    let mut stages = Vec::with_capacity(tower.depth() + 1);
    let b = &tower.stages[0];
    stages.push(
        (0..=b.top())
            .map(|d| {
                b.cells(d)
                    .map(|c| PhiChart { carrier: c, vertices: (0..S::vertex_count(d)).map(|p| standard_vertex::<S, T>(d, p)).collect() })
                    .collect()
            })
            .collect::<Vec<Vec<_>>>(),
    );
    for i in 0..tower.depth() {
        let p = &tower.stages[i + 1];
        let prev: &Vec<Vec<PhiChart<T>>> = &stages[i];
        let next = (0..=p.top())
            .map(|d| {
                p.cells(d)
                    .map(|c| {
                        let sigma = tower.sds[i].carrier(c);
                        let up = &prev[sigma.dim][sigma.idx];
                        let vertices = tower.sds[i]
                            .vertex_chart(c)
                            .into_iter()
                            .map(|w| {
                                let local: Vec<T> = w.into_iter().map(|x| T::dyadic(x as i64, 1)).collect();
                                interpolate::<S, T>(&up.vertices, &local)
                            })
                            .collect();
                        PhiChart { carrier: up.carrier, vertices }
                    })
                    .collect()
            })
            .collect();
        stages.push(next);
    }
    stages
}

/// A point of a top-stage cell, moved into its carrier in the base.
pub fn phi_forward<S: Site, T: Scalar>(chart: &PhiChart<T>, local: &[T]) -> Vec<T> {
    interpolate::<S, T>(&chart.vertices, local)
}

fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs_val().partial_cmp(&a[j][col].abs_val()).unwrap())?;
        if a[piv][col].abs_val() <= T::tolerance() || a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col].clone() / a[col][col].clone();
                for k in col..n {
                    a[r][k] = a[r][k].clone() - f.clone() * a[col][k].clone();
                }
                b[r] = b[r].clone() - f * b[col].clone();
            }
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

/// The inverse transport: the top-stage cell whose interior contains the
/// interior point `local` of the base cell σ, with local coordinates there.
pub fn phi_locate<S: Subdividable, T: Scalar>(
    tower: &Tower<S>,
    charts: &[Vec<PhiChart<T>>],
    sigma: CellId,
    local: &[T],
) -> Option<(CellId, Vec<T>)> {
    let top = tower.top();
    let d = sigma.dim;
    for c in top.cells(d) {
        let ch = &charts[d][c.idx];
        if ch.carrier != sigma {
            continue;
        }
        let t = match S::KIND {
            SiteKind::Simplex => {
                // Σ t_j v_j = local, one row per coordinate
                let a: Vec<Vec<T>> = (0..=d).map(|r| (0..=d).map(|j| ch.vertices[j][r].clone()).collect()).collect();
                solve(a, local.to_vec())?
            }
            SiteKind::Cube => {
                // each local coordinate moves exactly one carrier coordinate
                let o = &ch.vertices[0];
                let mut t = vec![T::zero(); d];
                for (i, ti) in t.iter_mut().enumerate() {
                    let e = &ch.vertices[1 << i];
                    let j = (0..d).find(|&j| e[j] != o[j])?;
                    *ti = (local[j].clone() - o[j].clone()) / (e[j].clone() - o[j].clone());
                }
                t
            }
        };
        let interior = match S::KIND {
            SiteKind::Simplex => t.iter().all(|x| x.is_positive()),
            SiteKind::Cube => t.iter().all(|x| x.is_positive() && (T::one() - x.clone()).is_positive()),
        };
        if interior && approx_eq(&interpolate::<S, T>(&ch.vertices, &t), local) {
            return Some((c, t));
        }
    }
    None
}

/// A closed target simplex together with the images of a source cell's
/// vertices, written in its coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart<T> {
    pub tau: CellId,
    pub coords: Vec<Vec<T>>,
}

/// A piecewise-linear map |source| → |target| given by vertex images and one
/// closed target chart per nondegenerate source cell. Cubical cells are
/// extended linearly over their standard triangulation.
#[derive(Clone, Debug)]
pub struct PLVertexMap<S: Site, T> {
    pub source: Presheaf<S>,
    pub target: Presheaf<Simplex>,
    pub charts: Vec<Vec<Chart<T>>>,
}

impl<S: Site, T: Scalar> PLVertexMap<S, T> {
    pub fn new(source: Presheaf<S>, target: Presheaf<Simplex>, charts: Vec<Vec<Chart<T>>>) -> Result<Self> {
        let f = PLVertexMap { source, target, charts };
        f.validate()?;
        Ok(f)
    }

    /// Charts are well formed and agree on shared vertices.
    pub fn validate(&self) -> Result<()> {
        let top = if self.source.is_empty() { 0 } else { self.source.top() + 1 };
        if self.charts.len() < top || (0..top).any(|d| self.charts[d].len() != self.source.count(d)) {
            return Err(Error::Invalid("one chart per nondegenerate source cell is required".into()));
        }
        for c in self.source.all_cells() {
            let ch = &self.charts[c.dim][c.idx];
            if ch.tau.dim >= self.target.counts().len() || ch.tau.idx >= self.target.count(ch.tau.dim) {
                return Err(Error::Invalid(format!("chart of {c} names a missing target cell")));
            }
            if ch.coords.len() != S::vertex_count(c.dim) {
                return Err(Error::Invalid(format!("chart of {c} has {} vertex images", ch.coords.len())));
            }
            let verts = self.source.vertices(Cell::nd(c));
            for (j, x) in ch.coords.iter().enumerate() {
                let p = GeomPoint::from_chart(&self.target, ch.tau, x)?;
                if !p.same_point(&self.vertex_image(verts[j])?) {
                    return Err(Error::Invalid(format!("chart of {c} disagrees with vertex {}", verts[j])));
                }
            }
        }
        Ok(())
    }

    pub fn vertex_image(&self, v: usize) -> Result<GeomPoint<T>> {
        let ch = &self.charts[0][v];
        GeomPoint::from_chart(&self.target, ch.tau, &ch.coords[0])
    }

    /// f at local coordinates of a source cell, in that cell's chart.
    pub fn eval(&self, c: CellId, local: &[T]) -> Vec<T> {
        let ch = &self.charts[c.dim][c.idx];
        match S::KIND {
            SiteKind::Simplex => interpolate::<Simplex, T>(&ch.coords, local),
            SiteKind::Cube => {
                // standard triangulation: coordinates sorted in decreasing order
                let n = local.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| local[b].partial_cmp(&local[a]).unwrap().then(a.cmp(&b)));
                let mut corner = 0usize;
                let mut prev = T::one();
                let mut out = vec![T::zero(); ch.coords[0].len()];
                let add = |w: T, p: usize, out: &mut Vec<T>| {
                    for (o, x) in out.iter_mut().zip(&ch.coords[p]) {
                        *o = o.clone() + w.clone() * x.clone();
                    }
                };
                for &i in &order {
                    add(prev - local[i].clone(), corner, &mut out);
                    prev = local[i].clone();
                    corner |= 1 << i;
                }
                add(prev, corner, &mut out);
                out
            }
        }
    }

    /// The same map with every coordinate converted.
    pub fn map_scalars<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PLVertexMap<S, U> {
        let charts = self
            .charts
            .iter()
            .map(|l| l.iter().map(|c| Chart { tau: c.tau, coords: c.coords.iter().map(|x| x.iter().map(&f).collect()).collect() }).collect())
            .collect();
        PLVertexMap { source: self.source.clone(), target: self.target.clone(), charts }
    }

    /// Every cell sent to a single vertex.
    pub fn constant(source: Presheaf<S>, target: Presheaf<Simplex>, vertex: usize) -> Self {
        let charts = (0..=source.top())
            .map(|d| {
                source
                    .cells(d)
                    .map(|_| Chart { tau: CellId::new(0, vertex), coords: vec![vec![T::one()]; S::vertex_count(d)] })
                    .collect()
            })
            .collect();
        PLVertexMap { source, target, charts }
    }
}

impl<T: Scalar> PLVertexMap<Simplex, T> {
    /// The realization of a simplicial function.
    pub fn realize(source: Presheaf<Simplex>, target: Presheaf<Simplex>, g: &Morphism) -> Self {
        let charts = (0..=source.top())
            .map(|d| {
                source
                    .cells(d)
                    .map(|c| {
                        let x = g.image(c);
                        let s = Simplex::surj_from_code(x.level, x.code);
                        let coords = s.table.iter().map(|&j| standard_vertex::<Simplex, T>(x.base.dim, j)).collect();
                        Chart { tau: x.base, coords }
                    })
                    .collect()
            })
            .collect();
        PLVertexMap { source, target, charts }
    }
}

/// For every top-stage cell of sd^k(source): the chart of its root carrier
/// and the images of its vertices there.
pub fn subdivided_images<S: Subdividable, T: Scalar>(f: &PLVertexMap<S, T>, tower: &Tower<S>) -> Vec<Vec<Chart<T>>> {
    let charts = phi_charts::<S, T>(tower);
    let top = charts.last().unwrap();
    top.iter()
        .map(|l| {
            l.iter()
                .map(|ch| Chart {
                    tau: f.charts[ch.carrier.dim][ch.carrier.idx].tau,
                    coords: ch.vertices.iter().map(|v| f.eval(ch.carrier, v)).collect(),
                })
                .collect()
        })
        .collect()
}

/// Per source cell, a target vertex whose open star contains the image, or
/// `None` where there is no such vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarReport {
    pub witnesses: Vec<Vec<Option<usize>>>,
}

impl StarReport {
    pub fn holds(&self) -> bool {
        self.witnesses.iter().flatten().all(|w| w.is_some())
    }
    pub fn obstructions(&self) -> Vec<CellId> {
        let mut out = Vec::new();
        for (d, l) in self.witnesses.iter().enumerate() {
            for (i, w) in l.iter().enumerate() {
                if w.is_none() {
                    out.push(CellId::new(d, i));
                }
            }
        }
        out
    }
}

/// A vertex v lies in every carrier of a convex image inside |τ| exactly
/// when v carries positive weight at every vertex image.
fn star_witness<T: Scalar>(target: &Presheaf<Simplex>, ch: &Chart<T>) -> Option<usize> {
    let verts = target.vertices(Cell::nd(ch.tau));
    let mut cands: Vec<usize> = verts.clone();
    cands.sort();
    cands.dedup();
    cands.into_iter().find(|&v| {
        ch.coords.iter().all(|x| {
            let w = verts.iter().zip(x).filter(|(u, _)| **u == v).fold(T::zero(), |a, (_, c)| a + c.clone());
            w.is_positive()
        })
    })
}

pub fn star_report<T: Scalar>(target: &Presheaf<Simplex>, images: &[Vec<Chart<T>>]) -> StarReport {
    StarReport { witnesses: images.iter().map(|l| l.iter().map(|ch| star_witness(target, ch)).collect()).collect() }
}

/// The star condition for f itself.
pub fn star_condition<S: Site, T: Scalar>(f: &PLVertexMap<S, T>) -> StarReport {
    star_report(&f.target, &f.charts)
}

/// The face of τ spanned by the minimum-support positions of `points`, in
/// the given order; fails if those positions decrease.
fn min_face<T: Scalar>(target: &Presheaf<Simplex>, tau: CellId, points: &[&Vec<T>]) -> Result<Cell> {
    let table: Vec<usize> = points.iter().map(|x| min_position(x)).collect();
    if table.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Violation(format!("minimum supports decrease along a cell: {table:?}")));
    }
    Ok(target.act(Cell::nd(tau), &OrdMap::new(tau.dim + 1, table)))
}

/// The output of [`simplicial_approximation`].
pub struct SimplicialApproximation {
    pub k: usize,
    pub tower: Tower<Simplex>,
    pub psi: Morphism,
    pub star: StarReport,
    /// Each vertex of ψ lies below its f-image in their common chart, so
    /// the straight line from |ψ| to f is directed inside every target cell.
    pub straight_line: bool,
}

/// ψ: sd^k(source) → X with ψ(v) = min supp f(v), for the least k ≤ `cap`
/// satisfying the star condition.
pub fn simplicial_approximation<T: Scalar>(f: &PLVertexMap<Simplex, T>, cap: usize) -> Result<SimplicialApproximation> {
    for k in 0..=cap {
        let tower = Tower::new(&f.source, k);
        let images = subdivided_images(f, &tower);
        let star = star_report(&f.target, &images);
        if !star.holds() {
            continue;
        }
        let top = tower.top();
        let mut straight_line = true;
        let mut out = Vec::new();
        for (d, l) in images.iter().enumerate() {
            let mut lv = Vec::new();
            for ch in l {
                let pts: Vec<&Vec<T>> = ch.coords.iter().collect();
                lv.push(min_face(&f.target, ch.tau, &pts)?);
                for x in &ch.coords {
                    let v = standard_vertex::<Simplex, T>(ch.tau.dim, min_position(x));
                    straight_line &= simplex_leq(&v, x)?;
                }
            }
            out.push(lv);
            let _ = d;
        }
        let psi = Morphism { images: out };
        if !psi.verify(top, &f.target) {
            return Err(Error::Violation("approximation is not a simplicial function".into()));
        }
        return Ok(SimplicialApproximation { k, tower, psi, star, straight_line });
    }
    Err(Error::Budget(format!("star condition fails after {cap} subdivisions")))
}

/// Vertex-wise the minimum supports of f on sd^k C.
fn cube_corner_positions<T: Scalar>(ch: &Chart<T>) -> Vec<usize> {
    ch.coords.iter().map(|x| min_position(x)).collect()
}

/// The output of [`cubical_approximation`].
pub struct CubicalApproximation {
    pub k: usize,
    pub tower: Tower<Cube>,
    /// ψ: sd^k C → qua X.
    pub psi: Morphism,
    /// Its transpose tri sd^k C → X.
    pub transpose: Morphism,
    pub tri: Tri,
    pub star: StarReport,
}

/// ψ: sd^k C → qua X. A k-cube c goes to the simplicial map tri □⟦m⟧ → X
/// sending each chain of corners to the face of c's chart spanned by their
/// minimum supports.
pub fn cubical_approximation<T: Scalar>(f: &PLVertexMap<Cube, T>, q: &Qua, cap: usize) -> Result<CubicalApproximation> {
    if f.source.top() > q.max_dim() {
        return Err(Error::Invalid(format!("qua stores {} levels, the source has dimension {}", q.max_dim(), f.source.top())));
    }
    for k in 0..=cap {
        let tower = Tower::new(&f.source, k);
        let images = subdivided_images(f, &tower);
        let star = star_report(&f.target, &images);
        if !star.holds() {
            continue;
        }
        let mut psi_images = Vec::new();
        for (m, l) in images.iter().enumerate() {
            let obj = q.functor.obj(m);
            let build = &q.functor.builds[m];
            let mut lv = Vec::new();
            for ch in l {
                let pos = cube_corner_positions(ch);
                let qm = (0..=obj.top())
                    .map(|d| {
                        obj.cells(d)
                            .map(|y| {
                                let chain = build.value(y);
                                let table: Vec<usize> = chain.iter().map(|&p| pos[p as usize]).collect();
                                if table.windows(2).any(|w| w[0] > w[1]) {
                                    return Err(Error::Violation(format!("minimum supports decrease along the chain {chain:?}")));
                                }
                                Ok(f.target.act(Cell::nd(ch.tau), &OrdMap::new(ch.tau.dim + 1, table)))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let qm = Morphism { images: qm };
                lv.push(q.cell(&qm, m).ok_or_else(|| Error::Violation("cube image is not a cell of qua".into()))?);
            }
            psi_images.push(lv);
        }
        let psi = Morphism { images: psi_images };
        if !psi.verify(tower.top(), q.presheaf()) {
            return Err(Error::Violation("approximation is not a cubical function".into()));
        }
        let t = tri(tower.top());
        let transpose = transpose_right(&psi, &t, &f.target, q);
        if !transpose.verify(t.presheaf(), &f.target) {
            return Err(Error::Violation("transpose is not a simplicial function".into()));
        }
        return Ok(CubicalApproximation { k, tower, psi, transpose, tri: t, star });
    }
    Err(Error::Budget(format!("star condition fails after {cap} subdivisions")))
}

/// The output of [`kan_approximation`].
pub struct KanApproximation {
    pub k: usize,
    pub nerve: LevelBuild<Cube, Vec<u32>>,
    /// ψ′: sd^k C → ner^□P.
    pub psi_prime: Morphism,
    /// ψ = μ ∘ ex ψ′ ∘ ζ: C → ner^□P (ψ = ψ′ when k = 0).
    pub psi: Morphism,
}

/// Approximates f: |C| → |ner^Δ P| by a cubical function C → ner^□P through
/// the composition of the nerve. Only k ≤ 1 is supported.
pub fn kan_approximation<T: Scalar>(
    f: &PLVertexMap<Cube, T>,
    p: &Preorder,
    nerve_s: &LevelBuild<Simplex, Vec<u32>>,
    budget: CoendBudget,
) -> Result<KanApproximation> {
    let c = &f.source;
    let levels = budget.max_size.max(budget.max_dim).max(c.top());
    let nerve = nerve_cubical(p, levels);
    for k in 0..=1 {
        let tower = Tower::new(c, k);
        let images = subdivided_images(f, &tower);
        if !star_report(&f.target, &images).holds() {
            continue;
        }
        let elem = |ch: &Chart<T>, x: &Vec<T>| -> u32 {
            let v = f.target.vertices(Cell::nd(ch.tau))[min_position(x)];
            nerve_s.value(CellId::new(0, v))[0]
        };
        let mut psi_images = Vec::new();
        for (m, l) in images.iter().enumerate() {
            let mut lv = Vec::new();
            for ch in l {
                let values: Vec<u32> = ch.coords.iter().map(|x| elem(ch, x)).collect();
                lv.push(nerve.cell(m, &values).ok_or_else(|| Error::Violation(format!("corner values {values:?} are not monotone")))?);
            }
            psi_images.push(lv);
        }
        let psi_prime = Morphism { images: psi_images };
        if !psi_prime.verify(tower.top(), &nerve.presheaf) {
            return Err(Error::Violation("ψ′ is not a cubical function".into()));
        }
        if k == 0 {
            return Ok(KanApproximation { k, psi: psi_prime.clone(), psi_prime, nerve });
        }
        let sdc = tower.top();
        let ex_sd = ex(sdc, budget)?;
        let ex_d = ex(&nerve.presheaf, budget)?;
        let z = zeta(c, &tower.sds[0], &ex_sd)?;
        let exp = ex_morphism(&psi_prime, &nerve.presheaf, &ex_sd, &ex_d);
        let mu = nerve_mu(&nerve, &ex_d)?;
        let psi = z.then(&exp, &ex_sd.presheaf).then(&mu, &ex_d.presheaf);
        if !psi.verify(c, &nerve.presheaf) {
            return Err(Error::Violation("μ∘ex ψ′∘ζ is not a cubical function".into()));
        }
        return Ok(KanApproximation { k, nerve, psi_prime, psi });
    }
    Err(Error::Budget("star condition fails after 1 subdivision".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn join_examples() {
        let (v0, v1) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        assert_eq!(simplex_join(&v0, &v1).unwrap(), v1);
        assert!(simplex_leq(&v0, &v1).unwrap());
        let h = vec![0.5, 0.5];
        assert!(approx_eq(&simplex_join(&h, &v1).unwrap(), &v1));
        assert!(approx_eq(&simplex_join(&h, &v0).unwrap(), &h));
        assert!(simplex_leq(&v0, &h).unwrap() && !simplex_leq(&h, &v0).unwrap());
        // the bilinear formula fails idempotence
        assert!(approx_eq(&bilinear_join(&h, &h), &[0.25, 0.75]));
        assert!(simplex_join(&[0.5, 0.6], &h).is_err());
    }

    #[test]
    fn min_support_examples() {
        let d2 = representable::<Simplex>(2).presheaf;
        let p = GeomPoint::from_chart(&d2, CellId::new(2, 0), &[r(1, 3), r(1, 3), r(1, 3)]).unwrap();
        assert_eq!(min_support_vertex(&p, &d2), 0);
        let q = GeomPoint::from_chart(&d2, CellId::new(2, 0), &[r(0, 1), r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(q.cell.dim, 1);
        assert_eq!(min_support_vertex(&q, &d2), 1);
    }

    #[test]
    fn phi_positions_on_the_interval() {
        let d1 = representable::<Simplex>(1).presheaf;
        let t1 = Tower::new(&d1, 1);
        let c1 = phi_charts::<Simplex, Ratio<i64>>(&t1);
        let mids: Vec<_> = c1[1][0].iter().filter(|c| c.carrier.dim == 1).map(|c| c.vertices[0].clone()).collect();
        assert_eq!(mids, vec![vec![r(1, 2), r(1, 2)]]);
        let t2 = Tower::new(&d1, 2);
        let c2 = phi_charts::<Simplex, Ratio<i64>>(&t2);
        let mut xs: Vec<Ratio<i64>> = c2[2][0]
            .iter()
            .map(|c| {
                
                if c.carrier.dim == 1 { c.vertices[0][1] } else { r(d1.vertices(Cell::nd(c.carrier))[0] as i64, 1) }
            })
            .collect();
        xs.sort();
        assert_eq!(xs, vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)]);
    }

    #[test]
    fn star_examples() {
        let i = representable::<Cube>(1).presheaf;
        let d1 = representable::<Simplex>(1).presheaf;
        let id = PLVertexMap::<Cube, Ratio<i64>>::new(
            i.clone(),
            d1.clone(),
            vec![
                vec![
                    Chart { tau: CellId::new(0, 0), coords: vec![vec![r(1, 1)]] },
                    Chart { tau: CellId::new(0, 1), coords: vec![vec![r(1, 1)]] },
                ],
                vec![Chart { tau: CellId::new(1, 0), coords: vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]] }],
            ],
        )
        .unwrap();
        assert!(!star_condition(&id).holds());
        let t = Tower::new(&i, 2);
        assert!(star_report(&d1, &subdivided_images(&id, &t)).holds());
        let c = PLVertexMap::<Cube, Ratio<i64>>::constant(i, d1, 1);
        assert_eq!(star_condition(&c).witnesses, vec![vec![Some(1), Some(1)], vec![Some(1)]]);
    }
}
