//! Diagrams of presheaves over finite shapes, natural families between them,
//! directed homotopy through a cylinder, and homotopy classes.

use crate::error::{Error, Result};
use crate::extension::{ex_checked, ex_morphism, CoendBudget};
use crate::order::Preorder;
use crate::presheaf::{for_each_morphism, product, Cell, CellId, LevelBuild, Morphism, Presheaf, SearchOptions, Tensor};
use crate::site::{Cube, Simplex, Site};
use crate::triangulation::nerve_cubical;
use std::collections::HashMap;
use std::ops::ControlFlow;

/// A finitely presented small category with finite hom-sets. Relations are
/// pairs of composable arrow paths (listed first to last) that must agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramShape {
    pub name: String,
    pub objects: usize,
    pub arrows: Vec<(usize, usize)>,
    pub relations: Vec<(Vec<usize>, Vec<usize>)>,
}

impl DiagramShape {
    pub fn point() -> Self {
        DiagramShape { name: "point".into(), objects: 1, arrows: vec![], relations: vec![] }
    }
    /// ∂ → I: object 0 is the boundary, object 1 the interval.
    pub fn pair() -> Self {
        DiagramShape { name: "pair".into(), objects: 2, arrows: vec![(0, 1)], relations: vec![] }
    }
    /// a → c ← b.
    pub fn cospan() -> Self {
        DiagramShape { name: "cospan".into(), objects: 3, arrows: vec![(0, 2), (1, 2)], relations: vec![] }
    }
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "point" => Some(Self::point()),
            "pair" => Some(Self::pair()),
            "cospan" => Some(Self::cospan()),
            _ => None,
        }
    }
    /// Objects ordered so that every arrow goes forward.
    fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indeg = vec![0; self.objects];
        for &(_, t) in &self.arrows {
            indeg[t] += 1;
        }
        let mut ready: Vec<usize> = (0..self.objects).filter(|&o| indeg[o] == 0).collect();
        let mut out = Vec::new();
        while let Some(o) = ready.pop() {
            out.push(o);
            for &(s, t) in &self.arrows {
                if s == o {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        if out.len() != self.objects {
            return Err(Error::Invalid(format!("shape {} has a cycle of generating arrows", self.name)));
        }
        Ok(out)
    }
}

/// A functor from a shape to presheaves.
#[derive(Clone, Debug)]
pub struct Diagram<S: Site> {
    pub shape: DiagramShape,
    pub values: Vec<Presheaf<S>>,
    pub actions: Vec<Morphism>,
}

impl<S: Site> Diagram<S> {
    pub fn single(p: Presheaf<S>) -> Self {
        Diagram { shape: DiagramShape::point(), values: vec![p], actions: vec![] }
    }

    pub fn check(&self) -> Result<()> {
        if self.values.len() != self.shape.objects || self.actions.len() != self.shape.arrows.len() {
            return Err(Error::Invalid("diagram does not match its shape".into()));
        }
        for (a, &(s, t)) in self.shape.arrows.iter().enumerate() {
            if !self.actions[a].verify(&self.values[s], &self.values[t]) {
                return Err(Error::Invalid(format!("action of arrow {a} is not a morphism")));
            }
        }
        for (lhs, rhs) in &self.shape.relations {
            let start = self.shape.arrows[lhs[0]].0;
            let comp = |path: &[usize]| {
                let mut m = Morphism::identity(&self.values[start]);
                let mut cur = start;
                for &a in path {
                    m = m.then(&self.actions[a], &self.values[cur]);
                    cur = self.shape.arrows[a].1;
                }
                m
            };
            if comp(lhs) != comp(rhs) {
                return Err(Error::Invalid("diagram violates a relation of its shape".into()));
            }
        }
        Ok(())
    }

    /// Total number of nondegenerate cells.
    pub fn size(&self) -> usize {
        self.values.iter().map(|v| v.total()).sum()
    }
}

/// A natural family of components B_o → C_o.
pub type DiagramMorphism = Vec<Morphism>;

pub fn is_natural<S: Site>(f: &DiagramMorphism, b: &Diagram<S>, c: &Diagram<S>) -> bool {
    b.shape.arrows.iter().enumerate().all(|(a, &(s, t))| {
        let lhs = b.actions[a].then(&f[t], &b.values[t]);
        let rhs = f[s].then(&c.actions[a], &c.values[s]);
        lhs == rhs
    })
}

/// Every natural family B → C, with optional fixed components.
pub fn enumerate_diagram_morphisms<S: Site>(
    b: &Diagram<S>,
    c: &Diagram<S>,
    fixed: &[(usize, Morphism)],
    node_budget: usize,
) -> Result<Vec<DiagramMorphism>> {
    let order = b.shape.topological_order()?;
    let fixed: HashMap<usize, &Morphism> = fixed.iter().map(|(o, m)| (*o, m)).collect();
    let mut out = Vec::new();
    let mut cur: Vec<Option<Morphism>> = vec![None; b.shape.objects];
    #[allow(clippy::too_many_arguments)]
    fn rec<S: Site>(
        i: usize,
        order: &[usize],
        b: &Diagram<S>,
        c: &Diagram<S>,
        fixed: &HashMap<usize, &Morphism>,
        cur: &mut Vec<Option<Morphism>>,
        out: &mut Vec<DiagramMorphism>,
        budget: usize,
    ) -> Result<()> {
        if i == order.len() {
            let f: DiagramMorphism = cur.iter().map(|m| m.clone().unwrap()).collect();
            if is_natural(&f, b, c) {
                out.push(f);
            }
            return Ok(());
        }
        let o = order[i];
        if let Some(m) = fixed.get(&o) {
            cur[o] = Some((*m).clone());
            rec(i + 1, order, b, c, fixed, cur, out, budget)?;
            cur[o] = None;
            return Ok(());
        }
        // pins from incoming arrows: f_o(B(a)x) = C(a)(f_s x)
        let mut pinned = Vec::new();
        for (a, &(s, t)) in b.shape.arrows.iter().enumerate() {
            if t != o {
                continue;
            }
            let fs = cur[s].as_ref().expect("sources decided first");
            for x in b.values[s].all_cells() {
                let bx = b.actions[a].image(x);
                if bx.code == 0 {
                    pinned.push((bx.base, c.actions[a].apply(&c.values[o], fs.image(x))));
                }
            }
        }
        let opts = SearchOptions { node_budget: budget, pinned, ..Default::default() };
        let mut comps = Vec::new();
        for_each_morphism(&b.values[o], &c.values[o], &opts, |m| {
            comps.push(m.clone());
            ControlFlow::Continue(())
        })?;
        for m in comps {
            cur[o] = Some(m);
            rec(i + 1, order, b, c, fixed, cur, out, budget)?;
        }
        cur[o] = None;
        Ok(())
    }
    rec(0, &order, b, c, &fixed, &mut cur, &mut out, node_budget)?;
    Ok(out)
}

/// A cylinder functor with its two ends and projection.
pub trait Cylinder: Site {
    type Cyl;
    fn cylinder(b: &Presheaf<Self>) -> Self::Cyl;
    fn cyl_presheaf(c: &Self::Cyl) -> &Presheaf<Self>;
    /// The inclusion at end ε ∈ {0, 1}.
    fn end(c: &Self::Cyl, b: &Presheaf<Self>, eps: usize) -> Morphism;
    fn projection(c: &Self::Cyl, b: &Presheaf<Self>) -> Morphism;
    /// f × id.
    fn cyl_morphism(f: &Morphism, src: &Self::Cyl, tgt: &Self::Cyl, tgt_base: &Presheaf<Self>) -> Morphism;
}

/// B ⊗ □[1].
impl Cylinder for Cube {
    type Cyl = Tensor;
    fn cylinder(b: &Presheaf<Cube>) -> Tensor {
        Tensor::new(b, &crate::presheaf::representable::<Cube>(1).presheaf)
    }
    fn cyl_presheaf(c: &Tensor) -> &Presheaf<Cube> {
        &c.presheaf
    }
    fn end(c: &Tensor, b: &Presheaf<Cube>, eps: usize) -> Morphism {
        // vertex ε of □[1] is the cell with that bit pattern
        c.slice_left(b, eps)
    }
    fn projection(c: &Tensor, b: &Presheaf<Cube>) -> Morphism {
        let _ = b;
        Morphism {
            images: c
                .pairs
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|&(x, y)| {
                            // collapse the interval coordinate when y is the edge
                            if y.dim == 0 {
                                Cell::nd(x)
                            } else {
                                Cell { level: x.dim + 1, code: 1 << x.dim, base: x }
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }
    fn cyl_morphism(f: &Morphism, src: &Tensor, tgt: &Tensor, _tgt_base: &Presheaf<Cube>) -> Morphism {
        let i = crate::presheaf::representable::<Cube>(1).presheaf;
        src.tensor_morphism(f, &Morphism::identity(&i), tgt)
    }
}

/// B × Δ[1].
pub struct Prism {
    pub build: LevelBuild<Simplex, (Cell, Cell)>,
    pub interval: Presheaf<Simplex>,
}

impl Cylinder for Simplex {
    type Cyl = Prism;
    fn cylinder(b: &Presheaf<Simplex>) -> Prism {
        let interval = crate::presheaf::representable::<Simplex>(1).presheaf;
        Prism { build: product(b, &interval), interval }
    }
    fn cyl_presheaf(c: &Prism) -> &Presheaf<Simplex> {
        &c.build.presheaf
    }
    fn end(c: &Prism, b: &Presheaf<Simplex>, eps: usize) -> Morphism {
        // vertex ε of Δ[1]
        let v = c.interval.vertices(Cell::nd(CellId::new(1, 0)))[eps];
        Morphism {
            images: (0..=b.top())
                .map(|d| b.cells(d).map(|x| c.build.normal[d][&(Cell::nd(x), Cell::point(v, d))]).collect())
                .collect(),
        }
    }
    fn projection(c: &Prism, _b: &Presheaf<Simplex>) -> Morphism {
        Morphism { images: c.build.nondeg.iter().map(|l| l.iter().map(|&(x, _)| x).collect()).collect() }
    }
    fn cyl_morphism(f: &Morphism, src: &Prism, tgt: &Prism, tgt_base: &Presheaf<Simplex>) -> Morphism {
        Morphism {
            images: src
                .build
                .nondeg
                .iter()
                .enumerate()
                .map(|(k, l)| l.iter().map(|&(x, y)| tgt.build.normal[k][&(f.apply(tgt_base, x), y)]).collect())
                .collect(),
        }
    }
}

/// The diagram cylinder B ⊗ I, object-wise.
pub struct DiagramCylinder<S: Cylinder> {
    pub cyls: Vec<S::Cyl>,
    pub diagram: Diagram<S>,
}

pub fn diagram_cylinder<S: Cylinder>(b: &Diagram<S>) -> DiagramCylinder<S> {
    let cyls: Vec<S::Cyl> = b.values.iter().map(|v| S::cylinder(v)).collect();
    let values = cyls.iter().map(|c| S::cyl_presheaf(c).clone()).collect();
    let actions = b
        .shape
        .arrows
        .iter()
        .enumerate()
        .map(|(a, &(s, t))| S::cyl_morphism(&b.actions[a], &cyls[s], &cyls[t], &b.values[t]))
        .collect();
    DiagramCylinder { diagram: Diagram { shape: b.shape.clone(), values, actions }, cyls }
}

/// Nodes are natural families B → C; a directed edge α → β records an
/// elementary homotopy H with H∘end₀ = α and H∘end₁ = β.
#[derive(Clone, Debug)]
pub struct HomotopyGraph {
    pub nodes: Vec<DiagramMorphism>,
    pub edges: Vec<(usize, usize)>,
}

impl HomotopyGraph {
    /// Components of the underlying undirected graph, as a class index per node.
    pub fn classes(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut a: usize) -> usize {
            while uf[a] != a {
                uf[a] = uf[uf[a]];
                a = uf[a];
            }
            a
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra != rb {
                uf[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut label: HashMap<usize, usize> = HashMap::new();
        (0..n)
            .map(|i| {
                let r = find(&mut uf, i);
                let next = label.len();
                *label.entry(r).or_insert(next)
            })
            .collect()
    }
    pub fn class_count(&self) -> usize {
        self.classes().into_iter().max().map_or(0, |m| m + 1)
    }
    pub fn node_index(&self, f: &DiagramMorphism) -> Option<usize> {
        self.nodes.iter().position(|g| g == f)
    }
}

/// Builds the homotopy graph. Fixed components stay fixed along homotopies
/// (the homotopy there is the fixed map composed with the projection).
pub fn homotopy_graph<S: Cylinder>(
    b: &Diagram<S>,
    c: &Diagram<S>,
    fixed: &[(usize, Morphism)],
    node_budget: usize,
) -> Result<HomotopyGraph> {
    let nodes = enumerate_diagram_morphisms(b, c, fixed, node_budget)?;
    let index: HashMap<&DiagramMorphism, usize> = nodes.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let cyl = diagram_cylinder(b);
    let cyl_fixed: Vec<(usize, Morphism)> = fixed
        .iter()
        .map(|(o, m)| (*o, S::projection(&cyl.cyls[*o], &b.values[*o]).then(m, &b.values[*o])))
        .collect();
    let hs = enumerate_diagram_morphisms(&cyl.diagram, c, &cyl_fixed, node_budget)?;
    let ends: Vec<[Morphism; 2]> =
        (0..b.shape.objects).map(|o| [S::end(&cyl.cyls[o], &b.values[o], 0), S::end(&cyl.cyls[o], &b.values[o], 1)]).collect();
    let mut edges = Vec::new();
    for h in &hs {
        let restrict = |eps: usize| -> DiagramMorphism {
            (0..b.shape.objects).map(|o| ends[o][eps].then(&h[o], &cyl.diagram.values[o])).collect()
        };
        let (a, z) = (restrict(0), restrict(1));
        let ia = *index.get(&a).ok_or_else(|| Error::Violation("homotopy end is not a node".into()))?;
        let iz = *index.get(&z).ok_or_else(|| Error::Violation("homotopy end is not a node".into()))?;
        edges.push((ia, iz));
    }
    edges.sort();
    edges.dedup();
    Ok(HomotopyGraph { nodes, edges })
}

/// Homotopy classes of natural families B → C.
pub fn classes<S: Cylinder>(b: &Diagram<S>, c: &Diagram<S>, fixed: &[(usize, Morphism)], node_budget: usize) -> Result<Vec<Vec<DiagramMorphism>>> {
    let g = homotopy_graph(b, c, fixed, node_budget)?;
    let labels = g.classes();
    let mut out: Vec<Vec<DiagramMorphism>> = vec![Vec::new(); g.class_count()];
    for (f, l) in g.nodes.into_iter().zip(labels) {
        out[l].push(f);
    }
    Ok(out)
}

/// The homotopies of the convex-nerve argument: for a meet semilattice P,
/// H_i: (ner P ⊗ ner P) ⊗ □[1] → ner P with H_i∘end₀ = ∧ and H_i∘end₁ = π_i.
/// Returns the number of nondegenerate cells of the source checked.
pub fn convex_nerve_check(p: &Preorder, levels: usize) -> Result<usize> {
    if !p.is_meet_semilattice() {
        return Err(Error::Invalid("not a meet semilattice".into()));
    }
    let small = nerve_cubical(p, levels);
    let big = nerve_cubical(p, 2 * levels + 1);
    let t = Tensor::new(&small.presheaf, &small.presheaf);
    let cyl = Cube::cylinder(&t.presheaf);
    let table = |c: CellId| -> Vec<u32> {
        let v = small.value(c);
        v.clone()
    };
    let meet = |a: u32, b: u32| p.meet(a as usize, b as usize).unwrap() as u32;
    let value = |x: CellId, y: CellId, e: CellId, which: usize| -> Vec<u32> {
        let (tx, ty) = (table(x), table(y));
        let (p_, q) = (x.dim, y.dim);
        let pts = 1usize << (p_ + q + e.dim);
        (0..pts)
            .map(|m| {
                let i = m & ((1 << p_) - 1);
                let j = (m >> p_) & ((1 << q) - 1);
                let eps = if e.dim == 1 { (m >> (p_ + q)) & 1 } else { e.idx };
                let (a, b) = (tx[i], ty[j]);
                match (eps, which) {
                    (0, _) => meet(a, b),
                    (_, 1) => a,
                    _ => b,
                }
            })
            .collect()
    };
    let mut checked = 0;
    for which in [1usize, 2] {
        let images: Vec<Vec<Cell>> = cyl
            .pairs
            .iter()
            .enumerate()
            .map(|(d, l)| {
                l.iter()
                    .map(|&(xy, e)| {
                        let (x, y) = t.pairs[xy.dim][xy.idx];
                        big.cell(d, &value(x, y, e, which)).expect("monotone values are nerve cells")
                    })
                    .collect()
            })
            .collect();
        let h = Morphism { images };
        if !h.verify(&cyl.presheaf, &big.presheaf) {
            return Err(Error::Violation("convex homotopy is not a cubical function".into()));
        }
        for eps in 0..2 {
            let end = Cube::end(&cyl, &t.presheaf, eps).then(&h, &cyl.presheaf);
            for d in 0..=t.presheaf.top() {
                for c in t.presheaf.cells(d) {
                    let (x, y) = t.pairs[d][c.idx];
                    let want = big.cell(d, &{
                        let (tx, ty) = (table(x), table(y));
                        (0..1usize << d)
                            .map(|m| {
                                let (a, b) = (tx[m & ((1 << x.dim) - 1)], ty[m >> x.dim]);
                                match (eps, which) {
                                    (0, _) => meet(a, b),
                                    (_, 1) => a,
                                    _ => b,
                                }
                            })
                            .collect()
                    });
                    if Some(end.image(c)) != want {
                        return Err(Error::Violation(format!("homotopy end {eps} is wrong at {c}")));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// One probe's outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResult {
    pub probe: String,
    pub source_classes: usize,
    pub target_classes: usize,
    pub injective: bool,
    pub surjective: bool,
    pub stable: bool,
}

/// Evidence for or against ψ: B → C being a directed equivalence: the induced
/// map on classes h(A, ex^k B) → h(A, ex^k C) for each probe A. Only k ≤ 1.
pub fn directed_equivalence_probe(
    psi: &DiagramMorphism,
    b: &Diagram<Cube>,
    c: &Diagram<Cube>,
    probes: &[(String, Diagram<Cube>)],
    k: usize,
    budget: CoendBudget,
    node_budget: usize,
) -> Result<Vec<ProbeResult>> {
    if k > 1 {
        return Err(Error::Invalid("probing supports ex^0 and ex^1".into()));
    }
    let (bb, cc, map, stable) = if k == 0 {
        (b.clone(), c.clone(), psi.clone(), true)
    } else {
        let mut stable = true;
        let exb: Vec<_> = b.values.iter().map(|v| ex_checked(v, budget)).collect::<Result<_>>()?;
        let exc: Vec<_> = c.values.iter().map(|v| ex_checked(v, budget)).collect::<Result<_>>()?;
        stable &= exb.iter().chain(&exc).all(|r| r.stable);
        let lift = |d: &Diagram<Cube>, e: &[crate::extension::ExResult]| Diagram {
            shape: d.shape.clone(),
            values: e.iter().map(|r| r.ex.presheaf.clone()).collect(),
            actions: d
                .shape
                .arrows
                .iter()
                .enumerate()
                .map(|(a, &(s, t))| ex_morphism(&d.actions[a], &d.values[t], &e[s].ex, &e[t].ex))
                .collect(),
        };
        let map = (0..b.shape.objects).map(|o| ex_morphism(&psi[o], &c.values[o], &exb[o].ex, &exc[o].ex)).collect();
        (lift(b, &exb), lift(c, &exc), map, stable)
    };
    let mut out = Vec::new();
    for (name, a) in probes {
        let gb = homotopy_graph(a, &bb, &[], node_budget)?;
        let gc = homotopy_graph(a, &cc, &[], node_budget)?;
        let (lb, lc) = (gb.classes(), gc.classes());
        let (nb, nc) = (gb.class_count(), gc.class_count());
        let mut image: Vec<Option<usize>> = vec![None; nb];
        for (i, f) in gb.nodes.iter().enumerate() {
            let g: DiagramMorphism = (0..a.shape.objects).map(|o| f[o].then(&map[o], &bb.values[o])).collect();
            let j = gc.node_index(&g).ok_or_else(|| Error::Violation("ψ∘f is not natural".into()))?;
            match image[lb[i]] {
                None => image[lb[i]] = Some(lc[j]),
                Some(x) if x != lc[j] => return Err(Error::Violation("ψ does not respect homotopy".into())),
                _ => {}
            }
        }
        let mut hit = vec![false; nc];
        let mut injective = true;
        for x in image.iter().flatten() {
            if hit[*x] {
                injective = false;
            }
            hit[*x] = true;
        }
        out.push(ProbeResult {
            probe: name.clone(),
            source_classes: nb,
            target_classes: nc,
            injective,
            surjective: hit.iter().all(|h| *h),
            stable,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::representable;

    #[test]
    fn interval_self_maps() {
        let i = Diagram::single(representable::<Cube>(1).presheaf);
        let g = homotopy_graph(&i, &i, &[], 1_000_000).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.class_count(), 2);
    }

    #[test]
    fn points_into_nerves() {
        let pt = Diagram::single(representable::<Cube>(0).presheaf);
        let n1 = Diagram::single(nerve_cubical(&Preorder::chain(1), 2).presheaf);
        assert_eq!(homotopy_graph(&pt, &n1, &[], 1_000_000).unwrap().class_count(), 1);
        let anti = Diagram::single(nerve_cubical(&Preorder::antichain(2), 2).presheaf);
        assert_eq!(homotopy_graph(&pt, &anti, &[], 1_000_000).unwrap().class_count(), 2);
    }

    #[test]
    fn convex_nerves() {
        convex_nerve_check(&Preorder::chain(0), 1).unwrap();
        convex_nerve_check(&Preorder::chain(1), 1).unwrap();
        convex_nerve_check(&crate::order::Shape::cube(2).preorder(), 1).unwrap();
    }

    #[test]
    fn collapsing_the_interval() {
        let (i, pt) = (representable::<Cube>(1).presheaf, representable::<Cube>(0).presheaf);
        let psi = vec![Morphism::constant(&i, 0)];
        let probes: Vec<(String, Diagram<Cube>)> =
            (0..=1).map(|n| (format!("□[{n}]"), Diagram::single(representable::<Cube>(n).presheaf))).collect();
        let r = directed_equivalence_probe(&psi, &Diagram::single(i), &Diagram::single(pt), &probes, 0, CoendBudget::default(), 1_000_000)
            .unwrap();
        // points of □[1] are all connected, but its two self-map classes merge
        assert_eq!((r[0].source_classes, r[0].injective, r[0].surjective), (1, true, true));
        assert_eq!((r[1].source_classes, r[1].target_classes, r[1].injective), (2, 1, false));
    }

    #[test]
    fn simplicial_interval_maps() {
        let d1 = Diagram::single(representable::<Simplex>(1).presheaf);
        let g = homotopy_graph(&d1, &d1, &[], 1_000_000).unwrap();
        assert_eq!(g.nodes.len(), 3);
        // min and max on the prism join the identity to both constants
        assert_eq!(g.class_count(), 1);
    }
}
