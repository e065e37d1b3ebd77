//! Example families: paths, grids, the square annulus, subdivided intervals
//! and pair-shaped dipath diagrams.

use crate::error::{Error, Result};
use crate::homotopy::{Diagram, DiagramShape};
use crate::presheaf::{Cell, CellId, Morphism, Presheaf, Sub, Tensor};
use crate::site::{Cube, Simplex, Site, SiteKind};
use crate::subdivision::Tower;
use crate::approx::{Chart, PLVertexMap};
use crate::triangulation::{tri, Tri};
use rand::seq::SliceRandom;
use rand::Rng;

/// A path of `m` edges, vertex i to vertex i+1, on either site.
pub fn path<S: Site>(m: usize) -> Presheaf<S> {
    let v = |i: usize| Cell::nd(CellId::new(0, i));
    let edges = (0..m)
        .map(|i| match S::KIND {
            // cube faces: coordinate 0 first; simplex face i omits vertex i
            SiteKind::Cube => vec![v(i), v(i + 1)],
            SiteKind::Simplex => vec![v(i + 1), v(i)],
        })
        .collect();
    let faces = if m == 0 { vec![vec![vec![]]] } else { vec![vec![vec![]; m + 1], edges] };
    Presheaf::from_faces(faces, None).expect("path faces")
}

/// `points` isolated vertices.
pub fn discrete<S: Site>(points: usize) -> Presheaf<S> {
    Presheaf::from_faces(vec![vec![vec![]; points]], None).expect("discrete")
}

/// The m×n grid of squares, path(m) ⊗ path(n). Vertex (i, j) has index
/// i·(n+1) + j.
pub fn grid(m: usize, n: usize) -> Tensor {
    Tensor::new(&path::<Cube>(m), &path::<Cube>(n))
}

/// The m×n grid with the listed 2-cells (by lower-left corner) removed.
/// Vertex and edge numbering is that of the grid.
pub fn grid_minus(m: usize, n: usize, holes: &[(usize, usize)]) -> Result<Presheaf<Cube>> {
    let g = grid(m, n);
    for &(i, j) in holes {
        if i >= m || j >= n {
            return Err(Error::Invalid(format!("hole ({i},{j}) outside a {m}×{n} grid")));
        }
    }
    let keep = g.presheaf.all_cells().filter(|c| {
        if c.dim != 2 {
            return true;
        }
        let (x, y) = g.pairs[2][c.idx];
        !holes.contains(&(x.idx, y.idx))
    });
    let s = Sub::generated(&g.presheaf, keep.collect::<Vec<_>>());
    Ok(s.as_presheaf(&g.presheaf).0)
}

/// The 3×3 grid minus its center square.
pub fn square_annulus() -> Presheaf<Cube> {
    grid_minus(3, 3, &[(1, 1)]).expect("fixed parameters")
}

/// Vertex index of grid point (i, j) in an m×n grid or its subcomplexes.
pub fn grid_vertex(n: usize, i: usize, j: usize) -> usize {
    i * (n + 1) + j
}

/// sd^k of the standard interval, on either site.
pub fn interval<S: crate::subdivision::Subdividable>(k: usize) -> Presheaf<S> {
    let base = crate::presheaf::representable::<S>(1).presheaf;
    Tower::new(&base, k).top().clone()
}

/// The pair-shaped diagrams ∂ ↪ path(len) and ∂ → C with ∂ = two points
/// sent to `start` and `end`. The ∂ component of every family is the
/// identity; pass it as the fixed component.
pub fn pair_dipath<S: Site>(c: &Presheaf<S>, start: usize, end: usize, len: usize) -> Result<(Diagram<S>, Diagram<S>, Morphism)> {
    let n0 = c.count(0);
    if start >= n0 || end >= n0 {
        return Err(Error::Invalid(format!("endpoint outside the {n0} vertices")));
    }
    let bd = discrete::<S>(2);
    let v = |i: usize| Cell::nd(CellId::new(0, i));
    let src = Diagram {
        shape: DiagramShape::pair(),
        values: vec![bd.clone(), path::<S>(len)],
        actions: vec![Morphism { images: vec![vec![v(0), v(len)]] }],
    };
    let tgt = Diagram {
        shape: DiagramShape::pair(),
        values: vec![bd.clone(), c.clone()],
        actions: vec![Morphism { images: vec![vec![v(start), v(end)]] }],
    };
    src.check()?;
    tgt.check()?;
    Ok((src, tgt, Morphism::identity(&bd)))
}

/// The families the command line can generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Grid(usize, usize),
    SquareAnnulus,
    Interval(usize),
    Path(usize),
}

impl Family {
    pub fn build(&self) -> Result<Presheaf<Cube>> {
        Ok(match *self {
            Family::Grid(m, n) => grid(m, n).presheaf,
            Family::SquareAnnulus => square_annulus(),
            Family::Interval(k) => interval::<Cube>(k),
            Family::Path(m) => path::<Cube>(m),
        })
    }
}

/// The simplicial path of `len` edges is convenient for simplicial probes.
pub fn simplicial_path(len: usize) -> Presheaf<Simplex> {
    path::<Simplex>(len)
}

/// The vertex sequence of a simplicial set that is a directed path, read
/// from its unique source vertex.
pub fn path_walk(p: &Presheaf<Simplex>) -> Result<Vec<usize>> {
    let n = p.count(0);
    let mut next = vec![None; n];
    let mut indeg = vec![0usize; n];
    for e in p.cells(1) {
        let (t, s) = (p.face(e, 0).base.idx, p.face(e, 1).base.idx);
        if next[s].replace(t).is_some() {
            return Err(Error::Invalid("not a path: a vertex has two outgoing edges".into()));
        }
        indeg[t] += 1;
    }
    let start = (0..n).find(|&v| indeg[v] == 0).ok_or_else(|| Error::Invalid("not a path: no start".into()))?;
    let mut walk = vec![start];
    while let Some(t) = next[*walk.last().unwrap()] {
        walk.push(t);
    }
    if walk.len() != n || p.count(2) != 0 {
        return Err(Error::Invalid("not a path".into()));
    }
    Ok(walk)
}

/// The simplicial map path(len) → X through the given vertices, padding with
/// stops at the end. Consecutive distinct vertices must span an edge.
pub fn path_morphism(x: &Presheaf<Simplex>, vertices: &[usize], len: usize) -> Result<Morphism> {
    if vertices.is_empty() || vertices.len() > len + 1 {
        return Err(Error::Invalid(format!("{} vertices do not fit a path of {len} edges", vertices.len())));
    }
    let mut vs = vertices.to_vec();
    vs.resize(len + 1, *vertices.last().unwrap());
    let edge = |u: usize, w: usize| -> Result<Cell> {
        if u == w {
            return Ok(Cell::point(u, 1));
        }
        x.cells(1)
            .find(|&e| x.face(e, 1).base.idx == u && x.face(e, 0).base.idx == w)
            .map(Cell::nd)
            .ok_or_else(|| Error::Invalid(format!("no edge {u} → {w}")))
    };
    let v0 = vs.iter().map(|&v| Cell::nd(CellId::new(0, v))).collect();
    let e1 = vs.windows(2).map(|w| edge(w[0], w[1])).collect::<Result<Vec<_>>>()?;
    Ok(Morphism { images: if len == 0 { vec![v0] } else { vec![v0, e1] } })
}

/// Drops repeated consecutive vertices.
pub fn without_stops(vertices: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(vertices.len());
    for &v in vertices {
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

// multiples of 2⁻¹⁰ keep every coordinate below exact in f64
fn dyadic<R: Rng>(rng: &mut R, range: std::ops::Range<u32>) -> f64 {
    rng.gen_range(range) as f64 / 1024.0
}

/// A random piecewise-linear dipath through tri(square annulus).
pub struct RandomDipath {
    pub tri: Tri,
    /// The PL map from a path of 2^k edges.
    pub map: PLVertexMap<Simplex, f64>,
    /// The lattice path it follows, as tri vertices from corner to corner.
    pub lattice: Vec<usize>,
    /// The plane positions of the source vertices.
    pub points: Vec<(f64, f64)>,
}

/// Samples a monotone lattice path from (0,0) to (3,3), cuts some of its
/// corners through the adjacent triangle, and spreads 2^k + 1 source
/// vertices along the result.
pub fn random_annulus_dipath<R: Rng>(rng: &mut R, k: u32) -> Result<RandomDipath> {
    let annulus = square_annulus();
    let t = tri(&annulus);
    let n = 3;
    // the annulus 2-cell with lower-left corner (i, j)
    let square = |i: usize, j: usize| -> Option<CellId> {
        if (i, j) == (1, 1) || i >= n || j >= n {
            return None;
        }
        annulus.cells(2).find(|&c| annulus.vertices(Cell::nd(c))[0] == grid_vertex(n, i, j))
    };
    // the lower triangle has chain (0,0) < (1,0) < (1,1), the upper one (0,0) < (0,1) < (1,1)
    let triangle = |i: usize, j: usize, upper: bool| -> Option<CellId> {
        let sq = square(i, j)?;
        let chain: &[u32] = if upper { &[0, 2, 3] } else { &[0, 1, 3] };
        Some(t.chain_cell(sq, chain).base)
    };
    let bary = |i: usize, j: usize, upper: bool, (x, y): (f64, f64)| -> Vec<f64> {
        let (s, u) = (x - i as f64, y - j as f64);
        if upper {
            vec![1.0 - u, u - s, s]
        } else {
            vec![1.0 - s, s - u, u]
        }
    };
    let mut steps = vec![true, true, true, false, false, false];
    steps.shuffle(rng);
    let mut lattice_pts = vec![(0usize, 0usize)];
    for &right in &steps {
        let (i, j) = *lattice_pts.last().unwrap();
        lattice_pts.push(if right { (i + 1, j) } else { (i, j + 1) });
    }
    // polyline: points with the triangle (corner, upper) holding each segment
    let mut pts: Vec<(f64, f64)> = lattice_pts.iter().map(|&(i, j)| (i as f64, j as f64)).collect();
    let mut seg: Vec<Option<(usize, usize, bool)>> = vec![None; 6];
    for a in 0..5 {
        let (i, j) = lattice_pts[a];
        if steps[a] != steps[a + 1] && (a == 0 || seg[a].is_none()) && square(i, j).is_some() && rng.gen_bool(0.5) {
            let (lo, hi) = loop {
                let (a, b) = (dyadic(rng, 52..973), dyadic(rng, 52..973));
                if a != b {
                    break if a < b { (a, b) } else { (b, a) };
                }
            };
            // right-then-up cuts through the lower triangle
            let upper = !steps[a];
            pts[a + 1] = if upper { (i as f64 + lo, j as f64 + hi) } else { (i as f64 + hi, j as f64 + lo) };
            seg[a] = Some((i, j, upper));
            seg[a + 1] = Some((i, j, upper));
        }
    }
    for a in 0..6 {
        if seg[a].is_none() {
            let (i, j) = lattice_pts[a];
            seg[a] = if steps[a] {
                if square(i, j).is_some() { Some((i, j, false)) } else { Some((i, j - 1, true)) }
            } else if square(i, j).is_some() {
                Some((i, j, true))
            } else {
                Some((i - 1, j, false))
            };
        }
    }
    let edges = 1usize << k;
    if edges < 6 {
        return Err(Error::Invalid("at least 8 source edges are needed".into()));
    }
    let mut per_seg = [1usize; 6];
    for _ in 6..edges {
        per_seg[rng.gen_range(0..6)] += 1;
    }
    let mut points = Vec::with_capacity(edges + 1);
    let mut owner = Vec::with_capacity(edges);
    for a in 0..6 {
        let (p, q) = (pts[a], pts[a + 1]);
        let mut cuts: Vec<f64> = (1..per_seg[a]).map(|_| dyadic(rng, 1..1024)).collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        points.push(p);
        for c in cuts {
            points.push((p.0 + c * (q.0 - p.0), p.1 + c * (q.1 - p.1)));
        }
        owner.extend(std::iter::repeat_n(a, per_seg[a]));
    }
    points.push(pts[6]);
    let source = path::<Simplex>(edges);
    let chart = |a: usize, pts: &[(f64, f64)]| -> Result<Chart<f64>> {
        let (i, j, upper) = seg[a].unwrap();
        let tau = triangle(i, j, upper).ok_or_else(|| Error::Violation("segment outside the annulus".into()))?;
        Ok(Chart { tau, coords: pts.iter().map(|&p| bary(i, j, upper, p)).collect() })
    };
    let mut v_charts = Vec::with_capacity(edges + 1);
    for v in 0..=edges {
        v_charts.push(chart(if v == edges { 5 } else { owner[v] }, &points[v..=v])?);
    }
    let mut e_charts = Vec::with_capacity(edges);
    for e in 0..edges {
        // path edges run v → v+1; simplicial vertex order is (v, v+1)
        e_charts.push(chart(owner[e], &points[e..=e + 1])?);
    }
    let map = PLVertexMap::new(source, t.presheaf().clone(), vec![v_charts, e_charts])?;
    let lattice = lattice_pts.iter().map(|&(i, j)| tri_vertex(&t, grid_vertex(n, i, j))).collect();
    Ok(RandomDipath { tri: t, map, lattice, points })
}

/// The vertex of tri B over a vertex of B.
pub fn tri_vertex(t: &Tri, v: usize) -> usize {
    t.chain_cell(CellId::new(0, v), &[0]).base.idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(grid(3, 3).presheaf.counts(), vec![16, 24, 9]);
        assert_eq!(square_annulus().counts(), vec![16, 24, 8]);
        assert_eq!(interval::<Cube>(2).counts(), vec![5, 4]);
        assert_eq!(interval::<Simplex>(2).counts(), vec![5, 4]);
        path::<Simplex>(3).check().unwrap();
        path::<Cube>(3).check().unwrap();
    }

    #[test]
    fn random_dipaths_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let d = random_annulus_dipath(&mut rng, 3).unwrap();
            assert_eq!(d.map.source.counts(), vec![9, 8]);
            assert_eq!(d.lattice.len(), 7);
            assert!(d.points.windows(2).all(|w| w[0].0 <= w[1].0 + 1e-12 && w[0].1 <= w[1].1 + 1e-12));
            assert_eq!(path_walk(&d.map.source).unwrap(), (0..9).collect::<Vec<_>>());
            assert!(path_morphism(d.tri.presheaf(), &d.lattice, 6).unwrap().verify(&path::<Simplex>(6), d.tri.presheaf()));
            // the coordinates are dyadic, so the exact copy is still a valid map
            let exact = d.map.map_scalars(|x| num_rational::Ratio::<i64>::approximate_float(*x).unwrap());
            exact.validate().unwrap();
            assert!(exact.charts.iter().flatten().flat_map(|c| c.coords.iter().flatten()).all(|r| 1024 * 1024 % r.denom() == 0));
        }
    }

    #[test]
    fn annulus_keeps_grid_numbering() {
        let g = grid(3, 3);
        let a = square_annulus();
        for d in 0..2 {
            for c in a.cells(d) {
                assert_eq!(a.faces_of(c), g.presheaf.faces_of(c));
            }
        }
    }
}
