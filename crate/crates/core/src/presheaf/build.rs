//! Building a presheaf from explicit level sets and an action.

use super::{Cell, CellId, Presheaf};
use crate::site::Site;
use std::collections::HashMap;
use std::hash::Hash;

/// The result of [`from_levels`]: the presheaf together with the dictionary
/// between caller values and normal cells.
#[derive(Clone, Debug)]
pub struct LevelBuild<S: Site, V> {
    pub presheaf: Presheaf<S>,
    /// Values of nondegenerate cells, indexed like the presheaf.
    pub nondeg: Vec<Vec<V>>,
    /// Normal form of every value at each level.
    pub normal: Vec<HashMap<V, Cell>>,
}

impl<S: Site, V: Clone + Eq + Hash> LevelBuild<S, V> {
    pub fn cell(&self, level: usize, v: &V) -> Option<Cell> {
        self.normal.get(level)?.get(v).copied()
    }
    pub fn value(&self, c: CellId) -> &V {
        &self.nondeg[c.dim][c.idx]
    }
}

/// Builds a presheaf whose level-k cells are `levels[k]` and whose action is
/// `act(k, v, f)` for f: [m] → [k]. A value is degenerate exactly when it is
/// the image of an elementary degeneracy. Levels must be closed under the
/// action up to the last given level; if `trunc` is set, higher levels are
/// treated as unknown.
pub fn from_levels<S, V, A>(levels: Vec<Vec<V>>, act: A, trunc: Option<usize>) -> LevelBuild<S, V>
where
    S: Site,
    V: Clone + Eq + Hash + std::fmt::Debug,
    A: Fn(usize, &V, &S::Map) -> V,
{
    let mut normal: Vec<HashMap<V, Cell>> = Vec::with_capacity(levels.len());
    let mut nondeg: Vec<Vec<V>> = Vec::with_capacity(levels.len());
    let mut faces: Vec<Vec<Vec<Cell>>> = Vec::with_capacity(levels.len());
    for (k, vals) in levels.into_iter().enumerate() {
        let mut nf: HashMap<V, Cell> = HashMap::with_capacity(vals.len());
        if k > 0 {
            let prev = &normal[k - 1];
            for (x, cx) in prev.iter() {
                let s_prev = S::surj_from_code(k - 1, cx.code);
                for i in 0..S::degeneracy_count(k - 1) {
                    let si = S::degeneracy(k - 1, i);
                    let y = act(k - 1, x, &si);
                    let code = S::surj_code(&S::compose(&s_prev, &si));
                    let cy = Cell { level: k, code, base: cx.base };
                    let old = nf.insert(y, cy);
                    debug_assert!(old.is_none_or(|o| o == cy), "inconsistent normal form at level {k}");
                }
            }
        }
        let mut nd = Vec::new();
        for v in vals {
            if !nf.contains_key(&v) {
                let c = Cell::nd(CellId::new(k, nd.len()));
                nf.insert(v.clone(), c);
                nd.push(v);
            }
        }
        let mut fk = Vec::with_capacity(nd.len());
        if k > 0 {
            for v in &nd {
                let fs = (0..S::face_count(k))
                    .map(|i| {
                        let w = act(k, v, &S::face(k, i));
                        *normal[k - 1]
                            .get(&w)
                            .unwrap_or_else(|| panic!("face {i} of {v:?} at level {k} is missing from level {}", k - 1))
                    })
                    .collect();
                fk.push(fs);
            }
        } else {
            fk = vec![vec![]; nd.len()];
        }
        faces.push(fk);
        nondeg.push(nd);
        normal.push(nf);
    }
    let presheaf = Presheaf::from_faces(faces, trunc).expect("level build produced malformed faces");
    LevelBuild { presheaf, nondeg, normal }
}

/// The representable presheaf on the object of dimension n; values are
/// site morphisms into it.
pub fn representable<S: Site>(n: usize) -> LevelBuild<S, S::Map> {
    let levels = (0..=n).map(|k| S::hom(k, n)).collect();
    from_levels::<S, _, _>(levels, |_, v, f| S::compose(v, f), None)
}
