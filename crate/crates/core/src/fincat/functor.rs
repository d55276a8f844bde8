use std::collections::BTreeMap;

use super::Category;
use crate::{Error, Result};

/// A functor between snapshots, given by explicit object and morphism maps.
///
/// Morphisms outside `morphism_map` are mapped by `fallback` when present
/// (for generator-backed sources whose hom-sets are not tabulated).
#[derive(Clone)]
pub struct Functor<C: Category, D: Category> {
    pub object_map: BTreeMap<C::Obj, D::Obj>,
    pub morphism_map: BTreeMap<C::Mor, D::Mor>,
}

impl<C: Category, D: Category> std::fmt::Debug for Functor<C, D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Functor")
            .field("objects", &self.object_map.len())
            .field("morphisms", &self.morphism_map.len())
            .finish()
    }
}

impl<C: Category, D: Category> Functor<C, D> {
    /// Tabulate `ob`/`mor` over the whole snapshot of `src`.
    pub fn tabulate(
        src: &C,
        ob: impl Fn(&C::Obj) -> Result<D::Obj>,
        mor: impl Fn(&C::Mor) -> Result<D::Mor>,
    ) -> Result<Self> {
        let mut object_map = BTreeMap::new();
        let mut morphism_map = BTreeMap::new();
        let snap = src.snapshot();
        for a in &snap {
            object_map.insert(a.clone(), ob(a)?);
        }
        for a in &snap {
            for b in &snap {
                for f in src.hom(a, b)? {
                    let g = mor(&f)?;
                    morphism_map.insert(f, g);
                }
            }
        }
        Ok(Functor {
            object_map,
            morphism_map,
        })
    }

    pub fn obj(&self, x: &C::Obj) -> Result<D::Obj> {
        self.object_map
            .get(x)
            .cloned()
            .ok_or_else(|| Error::OutOfBudget(format!("functor undefined on object {x:?}")))
    }

    pub fn mor(&self, f: &C::Mor) -> Result<D::Mor> {
        self.morphism_map
            .get(f)
            .cloned()
            .ok_or_else(|| Error::OutOfBudget(format!("functor undefined on morphism {f:?}")))
    }

    /// Identities and composition are preserved on the tabulated snapshot.
    pub fn check_functorial(&self, src: &C, dst: &D) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (x, y) in &self.object_map {
            if self.mor(&src.identity(x))? != dst.identity(y) {
                bad.push(format!("identity of {x:?} not preserved"));
            }
        }
        for f in self.morphism_map.keys() {
            let g = self.mor(f)?;
            if dst.source(&g) != self.obj(&src.source(f))? || dst.target(&g) != self.obj(&src.target(f))? {
                bad.push(format!("{f:?} mapped with wrong endpoints"));
            }
            for h in self.morphism_map.keys() {
                if src.target(f) == src.source(h) {
                    let hf = src.compose(h, f)?;
                    if let Some(img) = self.morphism_map.get(&hf) {
                        if dst.compose(&self.mor(h)?, &g)? != *img {
                            bad.push(format!("composite {h:?}∘{f:?} not preserved"));
                        }
                    }
                }
            }
        }
        Ok(bad)
    }
}

/// A natural transformation between two functors `C -> D`.
#[derive(Clone)]
pub struct NatTransform<C: Category, D: Category> {
    pub components: BTreeMap<C::Obj, D::Mor>,
}

impl<C: Category, D: Category> NatTransform<C, D> {
    /// Every naturality square `G(f) ∘ η_a = η_b ∘ F(f)` commutes.
    pub fn check_naturality(
        &self,
        src_cat: &C,
        dst_cat: &D,
        from: &Functor<C, D>,
        to: &Functor<C, D>,
    ) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in from.morphism_map.keys() {
            let (a, b) = (src_cat.source(f), src_cat.target(f));
            let (Some(ea), Some(eb)) = (self.components.get(&a), self.components.get(&b)) else {
                return Err(Error::Malformed(format!("missing component at {a:?} or {b:?}")));
            };
            let l = dst_cat.compose(&to.mor(f)?, ea)?;
            let r = dst_cat.compose(eb, &from.mor(f)?)?;
            if l != r {
                bad.push(format!("naturality fails at {f:?}"));
            }
        }
        Ok(bad)
    }
}
