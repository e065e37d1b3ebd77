//! Canonical JSON files for complexes, diagrams and PL maps.
//!
//! Keys are sorted, a cell reference is `[dim, idx]` or `[dim, idx, code]`
//! for a degenerate cell (the bit code of its surjection), and arrays of
//! scalars or of short scalar arrays are written on one line. Writing what
//! was read reproduces a canonical file byte for byte.

use crate::approx::{Chart, PLVertexMap, Scalar};
use crate::error::{Error, Result};
use crate::homotopy::{Diagram, DiagramShape};
use crate::presheaf::{Cell, CellId, Morphism, Presheaf};
use crate::site::{Cube, Simplex, Site, SiteKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Display;
use std::str::FromStr;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexJson {
    site: String,
    /// Nondegenerate cells per dimension.
    cells: Vec<usize>,
    /// `faces[d-1][idx]` lists the elementary faces of cell (d, idx).
    faces: Vec<Vec<Vec<Vec<u64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramJson {
    shape: String,
    objects: Vec<ComplexJson>,
    /// One morphism per arrow of the shape, as images of nondegenerate cells.
    arrows: Vec<Vec<Vec<Vec<u64>>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartJson {
    cell: Vec<u64>,
    coords: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PLJson {
    source: ComplexJson,
    target: ComplexJson,
    charts: Vec<Vec<ChartJson>>,
}

fn site_name(k: SiteKind) -> &'static str {
    match k {
        SiteKind::Cube => "cube",
        SiteKind::Simplex => "simplex",
    }
}

fn cell_ref(c: Cell) -> Vec<u64> {
    let mut v = vec![c.base.dim as u64, c.base.idx as u64];
    if c.code != 0 {
        v.push(c.code);
    }
    v
}

/// A level-`level` cell from its reference; `at` locates it for errors.
fn parse_ref(r: &[u64], level: usize, at: &dyn Fn() -> String) -> Result<Cell> {
    let bad = |why: &str| Error::Parse(format!("{}: {why}", at()));
    let (dim, idx, code) = match *r {
        [d, i] => (d as usize, i as usize, 0),
        [d, i, c] => (d as usize, i as usize, c),
        _ => return Err(bad("a cell reference is [dim, idx] or [dim, idx, code]")),
    };
    if dim > level || level >= 64 || code >> level != 0 || code.count_ones() as usize != level - dim {
        return Err(bad(&format!("[{dim}, {idx}, {code}] is not a level-{level} cell")));
    }
    Ok(Cell { level, code, base: CellId::new(dim, idx) })
}

fn complex_json<S: Site>(p: &Presheaf<S>) -> ComplexJson {
    let faces = (1..=p.top()).map(|d| p.cells(d).map(|c| p.faces_of(c).iter().map(|&f| cell_ref(f)).collect()).collect()).collect();
    ComplexJson { site: site_name(S::KIND).into(), cells: p.counts(), faces, truncation: p.truncation() }
}

fn complex_from_json<S: Site>(j: &ComplexJson) -> Result<Presheaf<S>> {
    if j.site != site_name(S::KIND) {
        return Err(Error::Parse(format!("expected a {} complex, found site \"{}\"", site_name(S::KIND), j.site)));
    }
    if j.faces.len() + 1 != j.cells.len().max(1) {
        return Err(Error::Parse(format!("{} dimensions counted but {} face tables", j.cells.len(), j.faces.len())));
    }
    let mut faces = vec![vec![vec![]; j.cells.first().copied().unwrap_or(0)]];
    for (k, table) in j.faces.iter().enumerate() {
        let d = k + 1;
        if table.len() != j.cells[d] {
            return Err(Error::Parse(format!("dimension {d}: {} face rows for {} cells", table.len(), j.cells[d])));
        }
        let mut level = Vec::with_capacity(table.len());
        for (idx, row) in table.iter().enumerate() {
            let cells = row
                .iter()
                .enumerate()
                .map(|(i, r)| parse_ref(r, d - 1, &|| format!("face {i} of cell ({d},{idx})")))
                .collect::<Result<Vec<_>>>()?;
            level.push(cells);
        }
        faces.push(level);
    }
    if j.cells.is_empty() {
        faces.clear();
    }
    let p = Presheaf::from_faces(faces, j.truncation)?;
    if p.counts() != j.cells && !(j.cells.iter().all(|&c| c == 0) && p.is_empty()) {
        return Err(Error::Parse(format!("trailing empty dimensions in {:?}", j.cells)));
    }
    p.check()?;
    Ok(p)
}

fn morphism_json(m: &Morphism) -> Vec<Vec<Vec<u64>>> {
    m.images.iter().map(|l| l.iter().map(|&c| cell_ref(c)).collect()).collect()
}

fn morphism_from_json<S: Site>(j: &[Vec<Vec<u64>>], src: &Presheaf<S>, tgt: &Presheaf<S>, what: &str) -> Result<Morphism> {
    let images = j
        .iter()
        .enumerate()
        .map(|(d, l)| {
            l.iter()
                .enumerate()
                .map(|(idx, r)| parse_ref(r, d, &|| format!("{what}: image of cell ({d},{idx})")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Morphism { images };
    m.check(src, tgt).map_err(|e| Error::Parse(format!("{what}: {e}")))?;
    Ok(m)
}

/// Writes a JSON value canonically: sorted keys, two-space indent, short
/// arrays inline, trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn inline(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| match x {
            Value::Array(b) => b.iter().all(|y| !y.is_array() && !y.is_object()),
            Value::Object(_) => false,
            _ => true,
        }),
        Value::Object(_) => false,
        _ => true,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        _ if inline(v) => out.push_str(&serde_json::to_string(v).expect("plain JSON")),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(&m[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        _ => unreachable!(),
    }
}

fn to_canonical<T: Serialize>(x: &T) -> String {
    canonical(&serde_json::to_value(x).expect("serializable"))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_complex<S: Site>(p: &Presheaf<S>) -> String {
    to_canonical(&complex_json(p))
}

pub fn load_complex<S: Site>(text: &str) -> Result<Presheaf<S>> {
    complex_from_json(&parse::<ComplexJson>(text)?)
}

/// A complex over whichever site its file names.
#[derive(Clone, Debug)]
pub enum AnyComplex {
    Cube(Presheaf<Cube>),
    Simplex(Presheaf<Simplex>),
}

impl AnyComplex {
    pub fn counts(&self) -> Vec<usize> {
        match self {
            AnyComplex::Cube(p) => p.counts(),
            AnyComplex::Simplex(p) => p.counts(),
        }
    }
    pub fn save(&self) -> String {
        match self {
            AnyComplex::Cube(p) => save_complex(p),
            AnyComplex::Simplex(p) => save_complex(p),
        }
    }
}

pub fn load_any_complex(text: &str) -> Result<AnyComplex> {
    let j: ComplexJson = parse(text)?;
    match j.site.as_str() {
        "cube" => Ok(AnyComplex::Cube(complex_from_json(&j)?)),
        "simplex" => Ok(AnyComplex::Simplex(complex_from_json(&j)?)),
        s => Err(Error::Parse(format!("unknown site \"{s}\""))),
    }
}

pub fn save_morphism(m: &Morphism) -> String {
    to_canonical(&morphism_json(m))
}

pub fn load_morphism<S: Site>(text: &str, src: &Presheaf<S>, tgt: &Presheaf<S>) -> Result<Morphism> {
    morphism_from_json(&parse::<Vec<Vec<Vec<u64>>>>(text)?, src, tgt, "morphism")
}

pub fn save_diagram<S: Site>(d: &Diagram<S>) -> String {
    to_canonical(&DiagramJson {
        shape: d.shape.name.clone(),
        objects: d.values.iter().map(complex_json).collect(),
        arrows: d.actions.iter().map(morphism_json).collect(),
    })
}

pub fn load_diagram<S: Site>(text: &str) -> Result<Diagram<S>> {
    let j: DiagramJson = parse(text)?;
    let shape = DiagramShape::by_name(&j.shape).ok_or_else(|| Error::Parse(format!("unknown shape \"{}\"", j.shape)))?;
    if j.objects.len() != shape.objects || j.arrows.len() != shape.arrows.len() {
        return Err(Error::Parse(format!(
            "shape {} has {} objects and {} arrows, the file has {} and {}",
            shape.name,
            shape.objects,
            shape.arrows.len(),
            j.objects.len(),
            j.arrows.len()
        )));
    }
    let values = j.objects.iter().map(complex_from_json::<S>).collect::<Result<Vec<_>>>()?;
    let actions = j
        .arrows
        .iter()
        .zip(&shape.arrows)
        .enumerate()
        .map(|(a, (m, &(s, t)))| morphism_from_json(m, &values[s], &values[t], &format!("arrow {a}")))
        .collect::<Result<Vec<_>>>()?;
    let d = Diagram { shape, values, actions };
    d.check()?;
    Ok(d)
}

pub fn save_pl_map<S: Site, T: Scalar + Display>(f: &PLVertexMap<S, T>) -> String {
    to_canonical(&PLJson {
        source: complex_json(&f.source),
        target: complex_json(&f.target),
        charts: f
            .charts
            .iter()
            .map(|l| {
                l.iter()
                    .map(|c| ChartJson {
                        cell: vec![c.tau.dim as u64, c.tau.idx as u64],
                        coords: c.coords.iter().map(|x| x.iter().map(|t| t.to_string()).collect()).collect(),
                    })
                    .collect()
            })
            .collect(),
    })
}

pub fn load_pl_map<S: Site, T: Scalar + FromStr>(text: &str) -> Result<PLVertexMap<S, T>> {
    let j: PLJson = parse(text)?;
    let source = complex_from_json::<S>(&j.source)?;
    let target = complex_from_json::<Simplex>(&j.target)?;
    let mut charts = Vec::with_capacity(j.charts.len());
    for (d, l) in j.charts.iter().enumerate() {
        let mut lv = Vec::with_capacity(l.len());
        for (idx, c) in l.iter().enumerate() {
            let at = || format!("chart of cell ({d},{idx})");
            let tau = match *c.cell {
                [td, ti] if (ti as usize) < target.count(td as usize) => CellId::new(td as usize, ti as usize),
                _ => return Err(Error::Parse(format!("{}: {:?} is not a target cell", at(), c.cell))),
            };
            let coords = c
                .coords
                .iter()
                .map(|x| {
                    x.iter()
                        .map(|s| s.parse::<T>().map_err(|_| Error::Parse(format!("{}: \"{s}\" is not a number", at()))))
                        .collect::<Result<Vec<T>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            lv.push(Chart { tau, coords });
        }
        charts.push(lv);
    }
    PLVertexMap::new(source, target, charts).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::square_annulus;
    use crate::presheaf::representable;
    use num_rational::Ratio;

    #[test]
    fn square_round_trip() {
        let sq = representable::<Cube>(2).presheaf;
        let text = save_complex(&sq);
        let back: Presheaf<Cube> = load_complex(&text).unwrap();
        assert_eq!(back.counts(), vec![4, 4, 1]);
        assert_eq!(save_complex(&back), text);
        let a = save_complex(&square_annulus());
        assert_eq!(save_complex(&load_complex::<Cube>(&a).unwrap()), a);
    }

    #[test]
    fn malformed_face_names_its_cell() {
        let text = save_complex(&representable::<Cube>(2).presheaf).replacen("[0, 1]", "[0, 9]", 1).replacen("[0,1]", "[0,9]", 1);
        let err = load_complex::<Cube>(&text).unwrap_err().to_string();
        assert!(err.contains("cell (1,"), "{err}");
        let wrong_site = load_complex::<Simplex>(&save_complex(&representable::<Cube>(1).presheaf));
        assert!(matches!(wrong_site, Err(Error::Parse(_))));
    }

    #[test]
    fn pl_map_round_trip() {
        let d1 = representable::<Simplex>(1).presheaf;
        let h = Ratio::new(1, 2);
        let e = CellId::new(1, 0);
        let vs = d1.vertices(Cell::nd(e));
        let one = Ratio::from_integer(1);
        let zero = Ratio::from_integer(0);
        // the first vertex stays put, the second goes to the midpoint
        let at = |v: usize| if v == vs[0] { vec![one, zero] } else { vec![h, h] };
        let f = PLVertexMap::<Simplex, Ratio<i64>>::new(
            d1.clone(),
            d1.clone(),
            vec![(0..2).map(|v| Chart { tau: e, coords: vec![at(v)] }).collect(), vec![Chart { tau: e, coords: vec![at(vs[0]), at(vs[1])] }]],
        )
        .unwrap();
        let text = save_pl_map(&f);
        assert!(text.contains("\"1/2\""));
        let g: PLVertexMap<Simplex, Ratio<i64>> = load_pl_map(&text).unwrap();
        assert_eq!(save_pl_map(&g), text);
    }
}
