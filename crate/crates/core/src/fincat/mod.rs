//! Finite and lazily enumerable categories.
//!
//! A [`Category`] exposes a finite *snapshot* of objects over which
//! exhaustive checks run. Hom-sets are enumerated on demand and may report
//! [`Error::OutOfBudget`] for generator-backed categories whose objects are
//! too large to enumerate.

mod functor;
mod gset;
mod laws;
mod table;

use std::fmt::Debug;
use std::hash::Hash;

pub use functor::{Functor, NatTransform};
pub use gset::{FiniteGroup, GSet, GSetCategory, GSetMap};
pub use laws::{
    check_category_laws, coproduct_search, find_isomorphism, is_epi, limit_search,
    verify_coproduct, verify_limit, LawReport,
};
pub use table::{TableCategory, TableCategoryBuilder};

use crate::{Error, Result};

/// A category presented by enumerable objects and hom-sets.
pub trait Category {
    type Obj: Clone + Eq + Hash + Ord + Debug;
    type Mor: Clone + Eq + Hash + Ord + Debug;

    fn source(&self, f: &Self::Mor) -> Self::Obj;
    fn target(&self, f: &Self::Mor) -> Self::Obj;
    fn identity(&self, x: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`; errors when `target(f) != source(g)`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor>;
    /// All morphisms `a -> b`, in a deterministic order.
    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Vec<Self::Mor>>;
    /// The finite snapshot of objects exhaustive checks range over.
    fn snapshot(&self) -> Vec<Self::Obj>;

    fn in_snapshot(&self, x: &Self::Obj) -> bool {
        self.snapshot().contains(x)
    }

    /// All `h` with `h ∘ t = g`.
    fn factor_through(&self, t: &Self::Mor, g: &Self::Mor) -> Result<Vec<Self::Mor>> {
        if self.source(t) != self.source(g) {
            return Err(Error::Malformed(format!("{t:?} and {g:?} have different sources")));
        }
        let mut out = Vec::new();
        for h in self.hom(&self.target(t), &self.target(g))? {
            if self.compose(&h, t)? == *g {
                out.push(h);
            }
        }
        Ok(out)
    }

    /// All `h` with `t ∘ h = g` (lifts of `g` along `t`).
    fn lift_along(&self, t: &Self::Mor, g: &Self::Mor) -> Result<Vec<Self::Mor>> {
        if self.target(t) != self.target(g) {
            return Err(Error::Malformed(format!("{t:?} and {g:?} have different targets")));
        }
        let mut out = Vec::new();
        for h in self.hom(&self.source(g), &self.source(t))? {
            if self.compose(t, &h)? == *g {
                out.push(h);
            }
        }
        Ok(out)
    }

    fn is_iso(&self, f: &Self::Mor) -> Result<bool> {
        let (a, b) = (self.source(f), self.target(f));
        for g in self.hom(&b, &a)? {
            if self.compose(&g, f)? == self.identity(&a) && self.compose(f, &g)? == self.identity(&b) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Name used in reports.
    fn describe_obj(&self, x: &Self::Obj) -> String {
        format!("{x:?}")
    }

    fn describe_mor(&self, f: &Self::Mor) -> String {
        format!("{f:?}")
    }
}

/// A cone over a pullback `a -> c <- b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PullbackCone<O, M> {
    pub apex: O,
    pub left: M,
    pub right: M,
}

/// A cone over a finite family of morphisms into a common target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WideCone<O, M> {
    pub apex: O,
    pub legs: Vec<M>,
}

/// Chosen finite limits.
pub trait FiniteLimits: Category {
    fn terminal(&self) -> Result<Self::Obj>;
    /// The unique map into the terminal object.
    fn to_terminal(&self, x: &Self::Obj) -> Result<Self::Mor>;
    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Result<PullbackCone<Self::Obj, Self::Mor>>;
    /// The unique `x -> apex` with `left ∘ x = a`, `right ∘ x = b`.
    fn pullback_mediate(
        &self,
        cone: &PullbackCone<Self::Obj, Self::Mor>,
        a: &Self::Mor,
        b: &Self::Mor,
    ) -> Result<Self::Mor>;

    fn product(&self, a: &Self::Obj, b: &Self::Obj) -> Result<PullbackCone<Self::Obj, Self::Mor>> {
        let f = self.to_terminal(a)?;
        let g = self.to_terminal(b)?;
        self.pullback(&f, &g)
    }

    /// Wide pullback of `maps` (all with a common target). Legs are the
    /// projections onto the sources of `maps`, in order.
    fn wide_pullback(&self, maps: &[Self::Mor]) -> Result<WideCone<Self::Obj, Self::Mor>> {
        let (first, rest) = maps
            .split_first()
            .ok_or_else(|| Error::Malformed("empty wide pullback".into()))?;
        let mut apex = self.source(first);
        let mut legs = vec![self.identity(&apex)];
        let mut to_base = first.clone();
        for m in rest {
            let pb = self.pullback(&to_base, m)?;
            legs = legs
                .iter()
                .map(|l| self.compose(l, &pb.left))
                .collect::<Result<_>>()?;
            legs.push(pb.right.clone());
            to_base = self.compose(&to_base, &pb.left)?;
            apex = pb.apex;
        }
        Ok(WideCone { apex, legs })
    }

    /// The unique map into a wide pullback apex with prescribed components.
    fn wide_mediate(
        &self,
        maps: &[Self::Mor],
        cone: &WideCone<Self::Obj, Self::Mor>,
        components: &[Self::Mor],
    ) -> Result<Self::Mor> {
        if components.len() != maps.len() || cone.legs.len() != maps.len() {
            return Err(Error::Malformed("wide mediate arity mismatch".into()));
        }
        let x = self.source(&components[0]);
        let mut found = None;
        for h in self.hom(&x, &cone.apex)? {
            let mut ok = true;
            for (leg, c) in cone.legs.iter().zip(components) {
                if self.compose(leg, &h)? != *c {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = Some(h);
                break;
            }
        }
        found.ok_or_else(|| Error::Absent("no mediating morphism into wide pullback".into()))
    }
}

/// Chosen finite coproducts.
pub trait FiniteCoproducts: Category {
    fn initial(&self) -> Result<Self::Obj>;
    fn initial_map(&self, x: &Self::Obj) -> Result<Self::Mor>;
    fn coproduct(&self, parts: &[Self::Obj]) -> Result<Cocone<Self::Obj, Self::Mor>>;
    /// The copairing `[maps]`: `apex -> t` restricting to `maps[i]` on part i.
    fn copair(&self, cocone: &Cocone<Self::Obj, Self::Mor>, maps: &[Self::Mor]) -> Result<Self::Mor>;
}

/// A cocone with chosen injections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cocone<O, M> {
    pub apex: O,
    pub injections: Vec<M>,
}

/// A finite diagram: shape nodes carry objects, shape arrows carry morphisms.
#[derive(Debug, Clone)]
pub struct Diagram<O, M> {
    pub nodes: Vec<O>,
    /// `(from, to, morphism)`.
    pub arrows: Vec<(usize, usize, M)>,
}

impl<O, M> Diagram<O, M> {
    pub fn empty() -> Self {
        Diagram {
            nodes: vec![],
            arrows: vec![],
        }
    }

    pub fn cospan(a: O, b: O, c: O, f: M, g: M) -> Self {
        Diagram {
            nodes: vec![a, b, c],
            arrows: vec![(0, 2, f), (1, 2, g)],
        }
    }

    pub fn pair(a: O, b: O) -> Self {
        Diagram {
            nodes: vec![a, b],
            arrows: vec![],
        }
    }
}

/// A cone with one leg per diagram node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cone<O, M> {
    pub apex: O,
    pub legs: Vec<M>,
}

/// Chosen-or-searched limit of a finite diagram.
pub fn limit<C: Category>(c: &C, d: &Diagram<C::Obj, C::Mor>) -> Result<Option<Cone<C::Obj, C::Mor>>> {
    limit_search(c, d)
}

/// Chosen-or-searched coproduct.
pub fn coproduct<C: Category>(c: &C, parts: &[C::Obj]) -> Result<Option<Cocone<C::Obj, C::Mor>>> {
    coproduct_search(c, parts)
}
