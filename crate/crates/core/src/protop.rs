//! Weak and transfinite topologies on the pro-category.
//!
//! Distinguished coverings keep the target's index: a member is the levelwise
//! fiber product `F_w(i) = F(i) ×_{F(top)} C_w` over the final level. All
//! constructions here stay on that index, so every step is checked square by
//! square.

use std::collections::BTreeSet;

use crate::fincat::{Category, Cocone, FiniteCoproducts, FiniteLimits};
use crate::pro::{hom_set, ProCategory, ProMorphism, ProObject};
use crate::sheaf::{classes, Presheaf, UnionFind};
use crate::site::{generate_k, CoveringFamily, SiteSpec};
use crate::tower::{Marker, Tower};
use crate::verdict::{Check, CheckReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Weak,
    Transfinite,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Weak => "weak",
            Topology::Transfinite => "transfinite",
        }
    }
}

pub struct ProSite<C: Category> {
    pub base: SiteSpec<C>,
    pub pro: ProCategory<C>,
    pub topology: Topology,
    /// Reindexing depth for [`is_pro_covering`].
    pub depth: usize,
}

impl<C: Category + Clone> ProSite<C> {
    /// Probes are the constants plus the two-level chains among the first
    /// `chains` snapshot objects.
    pub fn new(base: SiteSpec<C>, topology: Topology, chains: usize) -> Result<Self> {
        let pro = ProCategory::with_standard_probes(base.cat.clone(), chains)?;
        Ok(ProSite {
            base,
            pro,
            topology,
            depth: 2,
        })
    }
}

type PO<C> = ProObject<<C as Category>::Obj, <C as Category>::Mor>;
type PM<C> = ProMorphism<<C as Category>::Obj, <C as Category>::Mor>;

/// `members[w](i) = target(i) ×_{target(top)} C_w` with its two legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishedWeakCovering<O: Ord, M: Ord> {
    pub target: ProObject<O, M>,
    pub top: usize,
    pub base_family: CoveringFamily<O, M>,
    pub members: Vec<ProObject<O, M>>,
    /// `legs[w][i]: F_w(i) -> F(i)`.
    pub legs: Vec<Vec<M>>,
    /// `to_base[w][i]: F_w(i) -> C_w`.
    pub to_base: Vec<Vec<M>>,
}

pub type Dwc<C> = DistinguishedWeakCovering<<C as Category>::Obj, <C as Category>::Mor>;

fn final_level<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug>(f: &ProObject<O, M>) -> Result<usize> {
    f.index
        .maximum()
        .ok_or_else(|| Error::Precondition("index has no final element; take a level representation first".into()))
}

fn missing(e: Error) -> Error {
    match e {
        Error::OutOfBudget(m) | Error::Absent(m) => Error::Absent(format!("missing fiber product: {m}")),
        e => e,
    }
}

/// A pro-morphism with the given component at every level of a shared index.
pub fn levelwise<C: Category>(ps: &ProSite<C>, src: &PO<C>, dst: &PO<C>, levels: &[C::Mor]) -> Result<PM<C>> {
    if src.index != dst.index || levels.len() != dst.len() {
        return Err(Error::Malformed("levelwise map needs a shared index".into()));
    }
    ps.pro
        .morphism(src, dst, levels.iter().cloned().enumerate().collect())
}

pub fn make_weak_covering<C: FiniteLimits>(
    ps: &ProSite<C>,
    f: &PO<C>,
    fam: &CoveringFamily<C::Obj, C::Mor>,
) -> Result<Dwc<C>> {
    let c = &ps.base.cat;
    let top = final_level(f)?;
    if fam.target != f.objs[top] {
        return Err(Error::Malformed("base family must target the final level".into()));
    }
    if !ps.base.is_covering_family(fam)? {
        return Err(Error::Precondition("base family is not a covering".into()));
    }
    let mut members = Vec::new();
    let mut legs = Vec::new();
    let mut to_base = Vec::new();
    for cw in &fam.members {
        let cones = (0..f.len())
            .map(|i| c.pullback(f.map(i, top), cw).map_err(missing))
            .collect::<Result<Vec<_>>>()?;
        let mut maps = std::collections::BTreeMap::new();
        for (i, j) in f.index.pairs() {
            let a = c.compose(f.map(i, j), &cones[i].left)?;
            maps.insert((i, j), c.pullback_mediate(&cones[j], &a, &cones[i].right)?);
        }
        members.push(ProObject::new(
            c,
            f.index.clone(),
            cones.iter().map(|k| k.apex.clone()).collect(),
            maps,
        )?);
        legs.push(cones.iter().map(|k| k.left.clone()).collect());
        to_base.push(cones.into_iter().map(|k| k.right).collect());
    }
    Ok(DistinguishedWeakCovering {
        target: f.clone(),
        top,
        base_family: fam.clone(),
        members,
        legs,
        to_base,
    })
}

/// The single-member covering by a base covering morphism onto the final level.
pub fn weak_step<C: FiniteLimits>(ps: &ProSite<C>, f: &PO<C>, cover: &C::Mor) -> Result<Dwc<C>> {
    let top = final_level(f)?;
    make_weak_covering(
        ps,
        f,
        &CoveringFamily {
            target: f.objs[top].clone(),
            members: vec![cover.clone()],
        },
    )
}

/// `{id_F}` with literal identity legs.
pub fn identity_covering<C: Category>(ps: &ProSite<C>, f: &PO<C>) -> Result<Dwc<C>> {
    let c = &ps.base.cat;
    let top = final_level(f)?;
    Ok(DistinguishedWeakCovering {
        target: f.clone(),
        top,
        base_family: CoveringFamily {
            target: f.objs[top].clone(),
            members: vec![c.identity(&f.objs[top])],
        },
        members: vec![f.clone()],
        legs: vec![f.objs.iter().map(|x| c.identity(x)).collect()],
        to_base: vec![(0..f.len()).map(|i| f.map(i, top).clone()).collect()],
    })
}

pub fn member_morphism<C: Category>(ps: &ProSite<C>, d: &Dwc<C>, w: usize) -> Result<PM<C>> {
    levelwise(ps, &d.members[w], &d.target, &d.legs[w])
}

pub fn member_morphisms<C: Category>(ps: &ProSite<C>, d: &Dwc<C>) -> Result<Vec<PM<C>>> {
    (0..d.members.len()).map(|w| member_morphism(ps, d, w)).collect()
}

/// Every square is a pullback and the base family covers. Returns the first
/// violated condition.
pub fn verify_weak_covering<C: FiniteLimits>(ps: &ProSite<C>, d: &Dwc<C>) -> Result<Option<String>> {
    let c = &ps.base.cat;
    let f = &d.target;
    if f.index.maximum() != Some(d.top) {
        return Ok(Some("recorded top is not the final level".into()));
    }
    if d.base_family.target != f.objs[d.top] {
        return Ok(Some("base family does not target the final level".into()));
    }
    let n = d.base_family.members.len();
    if d.members.len() != n || d.legs.len() != n || d.to_base.len() != n {
        return Ok(Some("one member per base morphism required".into()));
    }
    if !ps.base.is_covering_family(&d.base_family)? {
        return Ok(Some("base family is not a covering".into()));
    }
    for (w, cw) in d.base_family.members.iter().enumerate() {
        let m = &d.members[w];
        if m.index != f.index || d.legs[w].len() != f.len() || d.to_base[w].len() != f.len() {
            return Ok(Some(format!("member {w} is not on the target's index")));
        }
        for i in 0..f.len() {
            let (leg, tb) = (&d.legs[w][i], &d.to_base[w][i]);
            if c.source(leg) != m.objs[i] || c.target(leg) != f.objs[i] || c.source(tb) != m.objs[i] || c.target(tb) != c.source(cw) {
                return Ok(Some(format!("member {w} level {i}: legs have wrong endpoints")));
            }
            if c.compose(f.map(i, d.top), leg)? != c.compose(cw, tb)? {
                return Ok(Some(format!("member {w} level {i}: square does not commute")));
            }
            let canon = c.pullback(f.map(i, d.top), cw).map_err(missing)?;
            let med = c.pullback_mediate(&canon, leg, tb)?;
            if !c.is_iso(&med)? {
                return Ok(Some(format!("member {w} level {i}: square is not a pullback")));
            }
        }
        for (i, j) in f.index.pairs() {
            if c.compose(&d.legs[w][j], m.map(i, j))? != c.compose(f.map(i, j), &d.legs[w][i])?
                || c.compose(&d.to_base[w][j], m.map(i, j))? != d.to_base[w][i]
            {
                return Ok(Some(format!("member {w}: transition {i} -> {j} is not natural")));
            }
        }
    }
    Ok(None)
}

/// Arrows from probe objects into `target` that factor through a member.
pub fn probe_sieve<C: Category>(ps: &ProSite<C>, target: &PO<C>, members: &[PM<C>]) -> Result<BTreeSet<PM<C>>> {
    let pc = &ps.pro;
    let mut out = BTreeSet::new();
    // composites are canonical, so the sieve is the set of images `m ∘ k`
    for m in members {
        if m.dst != *target {
            return Err(Error::Malformed("member does not land in the sieve target".into()));
        }
        for p in pc.probes() {
            for k in hom_set(pc, p, &m.src)? {
                out.insert(pc.compose(m, &k)?);
            }
        }
    }
    Ok(out)
}

/// `None` when both families generate the same sieve on the probe set.
pub fn sieves_agree<C: Category>(ps: &ProSite<C>, target: &PO<C>, a: &[PM<C>], b: &[PM<C>]) -> Result<Option<String>> {
    let (sa, sb) = (probe_sieve(ps, target, a)?, probe_sieve(ps, target, b)?);
    if sa == sb {
        return Ok(None);
    }
    let pc = &ps.pro;
    let odd = sa.symmetric_difference(&sb).next().unwrap();
    Ok(Some(format!(
        "sieves differ at {} ({} vs {} probe arrows)",
        pc.describe_mor(odd),
        sa.len(),
        sb.len()
    )))
}

/// Composite of an outer covering with one inner covering per member, as a
/// single covering on the outer target's index.
pub fn compose_weak<C: FiniteLimits>(ps: &ProSite<C>, outer: &Dwc<C>, inners: &[Dwc<C>]) -> Result<Dwc<C>> {
    let c = &ps.base.cat;
    if inners.len() != outer.members.len() {
        return Err(Error::Malformed("one inner covering per outer member required".into()));
    }
    let mut fam = Vec::new();
    let mut composite = Vec::new();
    for (w, inner) in inners.iter().enumerate() {
        if inner.target != outer.members[w] {
            return Err(Error::Malformed(format!("inner {w} does not target outer member {w}")));
        }
        if inner.top != outer.top {
            return Err(Error::Malformed(format!("inner {w} is on a different index")));
        }
        let mw = member_morphism(ps, outer, w)?;
        for (v, d) in inner.base_family.members.iter().enumerate() {
            fam.push(c.compose(&outer.legs[w][outer.top], d)?);
            composite.push(ps.pro.compose(&mw, &member_morphism(ps, inner, v)?)?);
        }
    }
    let out = make_weak_covering(
        ps,
        &outer.target,
        &CoveringFamily {
            target: outer.base_family.target.clone(),
            members: fam,
        },
    )?;
    if let Some(w) = sieves_agree(ps, &outer.target, &member_morphisms(ps, &out)?, &composite)? {
        return Err(Error::ConstructionFailed { step: 0, reason: w });
    }
    Ok(out)
}

/// Levelwise coproduct of pro-objects on one index, with the cocone at each level.
#[allow(clippy::type_complexity)]
pub fn levelwise_coproduct<C: FiniteCoproducts>(
    ps: &ProSite<C>,
    parts: &[PO<C>],
) -> Result<(PO<C>, Vec<Cocone<C::Obj, C::Mor>>)> {
    let c = &ps.base.cat;
    let first = parts
        .first()
        .ok_or_else(|| Error::Malformed("levelwise coproduct needs a part".into()))?;
    if parts.iter().any(|p| p.index != first.index) {
        return Err(Error::Malformed("levelwise coproduct needs a shared index".into()));
    }
    let cocones = (0..first.len())
        .map(|i| c.coproduct(&parts.iter().map(|p| p.objs[i].clone()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mut maps = std::collections::BTreeMap::new();
    for (i, j) in first.index.pairs() {
        let into = parts
            .iter()
            .enumerate()
            .map(|(w, p)| c.compose(&cocones[j].injections[w], p.map(i, j)))
            .collect::<Result<Vec<_>>>()?;
        maps.insert((i, j), c.copair(&cocones[i], &into)?);
    }
    let apex = ProObject::new(c, first.index.clone(), cocones.iter().map(|k| k.apex.clone()).collect(), maps)?;
    Ok((apex, cocones))
}

/// `∐ F_w -> F` for a distinguished covering, as a single-member covering by
/// `∐ C_w -> F(top)`.
pub fn copair_step<C: FiniteLimits + FiniteCoproducts>(ps: &ProSite<C>, d: &Dwc<C>) -> Result<Dwc<C>> {
    let c = &ps.base.cat;
    let (sum, cocones) = levelwise_coproduct(ps, &d.members)?;
    let bases: Vec<C::Obj> = d.base_family.members.iter().map(|m| c.source(m)).collect();
    let bsum = c.coproduct(&bases)?;
    let cover = c.copair(&bsum, &d.base_family.members)?;
    let mut legs = Vec::new();
    let mut to_base = Vec::new();
    for (i, k) in cocones.iter().enumerate() {
        let l: Vec<C::Mor> = d.legs.iter().map(|l| l[i].clone()).collect();
        legs.push(c.copair(k, &l)?);
        let t = d
            .to_base
            .iter()
            .enumerate()
            .map(|(w, t)| c.compose(&bsum.injections[w], &t[i]))
            .collect::<Result<Vec<_>>>()?;
        to_base.push(c.copair(k, &t)?);
    }
    Ok(DistinguishedWeakCovering {
        target: d.target.clone(),
        top: d.top,
        base_family: CoveringFamily {
            target: d.base_family.target.clone(),
            members: vec![cover],
        },
        members: vec![sum],
        legs: vec![legs],
        to_base: vec![to_base],
    })
}

/// The coproduct of single-member coverings on one index, over the levelwise
/// coproduct of their targets.
pub fn coproduct_step<C: FiniteLimits + FiniteCoproducts>(ps: &ProSite<C>, parts: &[Dwc<C>]) -> Result<Dwc<C>> {
    let c = &ps.base.cat;
    if parts.iter().any(|p| p.members.len() != 1) {
        return Err(Error::Malformed("coproduct of steps needs single-member coverings".into()));
    }
    let targets: Vec<PO<C>> = parts.iter().map(|p| p.target.clone()).collect();
    let members: Vec<PO<C>> = parts.iter().map(|p| p.members[0].clone()).collect();
    let (tsum, tco) = levelwise_coproduct(ps, &targets)?;
    let (msum, mco) = levelwise_coproduct(ps, &members)?;
    let top = final_level(&tsum)?;
    let bases: Vec<C::Obj> = parts.iter().map(|p| c.source(&p.base_family.members[0])).collect();
    let bsum = c.coproduct(&bases)?;
    let into_top = parts
        .iter()
        .enumerate()
        .map(|(w, p)| c.compose(&tco[top].injections[w], &p.base_family.members[0]))
        .collect::<Result<Vec<_>>>()?;
    let cover = c.copair(&bsum, &into_top)?;
    let mut legs = Vec::new();
    let mut to_base = Vec::new();
    for i in 0..tsum.len() {
        let l = parts
            .iter()
            .enumerate()
            .map(|(w, p)| c.compose(&tco[i].injections[w], &p.legs[0][i]))
            .collect::<Result<Vec<_>>>()?;
        legs.push(c.copair(&mco[i], &l)?);
        let t = parts
            .iter()
            .enumerate()
            .map(|(w, p)| c.compose(&bsum.injections[w], &p.to_base[0][i]))
            .collect::<Result<Vec<_>>>()?;
        to_base.push(c.copair(&mco[i], &t)?);
    }
    Ok(DistinguishedWeakCovering {
        target: tsum.clone(),
        top,
        base_family: CoveringFamily {
            target: tsum.objs[top].clone(),
            members: vec![cover],
        },
        members: vec![msum],
        legs: vec![legs],
        to_base: vec![to_base],
    })
}

/// A chain of single-member distinguished steps `Ũ -> ... -> U` followed by a
/// distinguished family over `Ũ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransfiniteCovering<O: Ord, M: Ord> {
    pub target: ProObject<O, M>,
    pub steps: Vec<DistinguishedWeakCovering<O, M>>,
    pub top: DistinguishedWeakCovering<O, M>,
}

pub type Tc<C> = TransfiniteCovering<<C as Category>::Obj, <C as Category>::Mor>;

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> TransfiniteCovering<O, M> {
    pub fn stages(&self) -> Vec<ProObject<O, M>> {
        let mut s = vec![self.target.clone()];
        s.extend(self.steps.iter().map(|d| d.members[0].clone()));
        s
    }

    /// Steps in the chain, not counting the final family.
    pub fn chain_length(&self) -> usize {
        self.steps.len()
    }
}

pub fn chain_tower<C: Category>(ps: &ProSite<C>, t: &Tc<C>) -> Result<Tower<PO<C>, PM<C>>> {
    let steps = t
        .steps
        .iter()
        .map(|d| member_morphism(ps, d, 0))
        .collect::<Result<Vec<_>>>()?;
    let weak = Marker {
        epi: false,
        covering: true,
        weak: true,
    };
    Ok(Tower {
        stages: t.stages(),
        markers: vec![weak; steps.len()],
        steps,
    })
}

/// The covering family `{U_w -> Ũ -> U}`.
pub fn transfinite_members<C: Category>(ps: &ProSite<C>, t: &Tc<C>) -> Result<Vec<PM<C>>> {
    let pc = &ps.pro;
    let chain = crate::tower::transfinite_composition(pc, &chain_tower(ps, t)?)?;
    member_morphisms(ps, &t.top)?
        .iter()
        .map(|m| pc.compose(&chain, m))
        .collect()
}

pub fn make_transfinite_covering<C: FiniteLimits>(
    ps: &ProSite<C>,
    target: &PO<C>,
    steps: Vec<Dwc<C>>,
    top: Dwc<C>,
) -> Result<Tc<C>> {
    let mut stage = target.clone();
    for (i, d) in steps.iter().enumerate() {
        if d.target != stage || d.members.len() != 1 {
            return Err(Error::ConstructionFailed {
                step: i,
                reason: "step is not a single-member covering of the previous stage".into(),
            });
        }
        if let Some(w) = verify_weak_covering(ps, d)? {
            return Err(Error::ConstructionFailed { step: i, reason: w });
        }
        stage = d.members[0].clone();
    }
    if top.target != stage {
        return Err(Error::ConstructionFailed {
            step: steps.len(),
            reason: "final family does not target the chain's top".into(),
        });
    }
    if let Some(w) = verify_weak_covering(ps, &top)? {
        return Err(Error::ConstructionFailed {
            step: steps.len(),
            reason: w,
        });
    }
    Ok(TransfiniteCovering {
        target: target.clone(),
        steps,
        top,
    })
}

/// The coproduct recipe: the outer chain, then `∐ U_w -> Ũ`, then the
/// coproduct of the inner chains padded by identities, then the inner final
/// families injected into the last coproduct stage.
pub fn compose_transfinite<C: FiniteLimits + FiniteCoproducts>(
    ps: &ProSite<C>,
    outer: &Tc<C>,
    inners: &[Tc<C>],
) -> Result<Tc<C>> {
    let c = &ps.base.cat;
    if inners.len() != outer.top.members.len() {
        return Err(Error::Malformed("one inner covering per outer member required".into()));
    }
    for (w, t) in inners.iter().enumerate() {
        if t.target != outer.top.members[w] {
            return Err(Error::Malformed(format!("inner {w} does not target outer member {w}")));
        }
    }
    // an empty final family makes the composite family empty as well
    if inners.is_empty() {
        return Ok(outer.clone());
    }
    let mut steps = outer.steps.clone();
    steps.push(copair_step(ps, &outer.top)?);
    let depth = inners.iter().map(|t| t.steps.len()).max().unwrap_or(0);
    let mut current: Vec<PO<C>> = outer.top.members.clone();
    for k in 0..depth {
        let parts = inners
            .iter()
            .zip(&current)
            .map(|(t, x)| match t.steps.get(k) {
                Some(d) => Ok(d.clone()),
                None => identity_covering(ps, x),
            })
            .collect::<Result<Vec<_>>>()?;
        let step = coproduct_step(ps, &parts)?;
        current = parts.iter().map(|p| p.members[0].clone()).collect();
        steps.push(step);
    }
    let (last, cocones) = levelwise_coproduct(ps, &current)?;
    let top = final_level(&last)?;
    let mut fam = Vec::new();
    for (w, t) in inners.iter().enumerate() {
        for g in &t.top.base_family.members {
            fam.push(c.compose(&cocones[top].injections[w], g)?);
        }
    }
    let top_family = make_weak_covering(
        ps,
        &last,
        &CoveringFamily {
            target: last.objs[top].clone(),
            members: fam,
        },
    )?;
    let out = make_transfinite_covering(ps, &outer.target, steps, top_family)?;
    // the composite family {V_wv -> U_w -> Ũ -> U}
    let pc = &ps.pro;
    let outer_members = transfinite_members(ps, outer)?;
    let mut composite = Vec::new();
    for (w, t) in inners.iter().enumerate() {
        for m in transfinite_members(ps, t)? {
            composite.push(pc.compose(&outer_members[w], &m)?);
        }
    }
    if let Some(w) = sieves_agree(ps, &outer.target, &transfinite_members(ps, &out)?, &composite)? {
        return Err(Error::ConstructionFailed {
            step: out.steps.len(),
            reason: w,
        });
    }
    Ok(out)
}

/// How a pro-covering verdict was witnessed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelRepresentation<M> {
    /// Covering components on the shared index.
    Levelwise(Vec<M>),
    /// The germ at the deepest levels, which represents `f` up to isomorphism.
    Deepest(M),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProCovering<M> {
    Yes(LevelRepresentation<M>),
    No(String),
    Unknown(String),
}

impl<M> ProCovering<M> {
    pub fn is_yes(&self) -> bool {
        matches!(self, ProCovering::Yes(_))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ProCovering::Yes(_) => "yes",
            ProCovering::No(_) => "no",
            ProCovering::Unknown(_) => "unknown",
        }
    }
}

/// Depth 0 searches covering components on a shared index. Depth 1 and up
/// also reads `f` at the deepest levels, which decides the question exactly
/// on indices with a least element.
pub fn is_pro_covering<C: Category>(ps: &ProSite<C>, f: &PM<C>, depth: usize) -> Result<ProCovering<C::Mor>> {
    let c = &ps.base.cat;
    let pc = &ps.pro;
    let (v, u) = (&f.src, &f.dst);
    let covers = |g: &C::Mor| -> Result<Option<bool>> {
        match ps.base.is_covering_morphism(g) {
            Ok(b) => Ok(Some(b)),
            Err(Error::OutOfBudget(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    if v.index == u.index {
        let mut cands = Vec::new();
        for i in 0..u.len() {
            let mut here = Vec::new();
            for g in c.hom(&v.objs[i], &u.objs[i])? {
                if pc.canonical_germ(v, &u.objs[i], (i, g.clone()))? == f.germs[i] && covers(&g)? == Some(true) {
                    here.push(g);
                }
            }
            cands.push(here);
        }
        fn go<C: Category>(
            c: &C,
            v: &ProObject<C::Obj, C::Mor>,
            u: &ProObject<C::Obj, C::Mor>,
            cands: &[Vec<C::Mor>],
            acc: &mut Vec<C::Mor>,
        ) -> Result<bool> {
            let i = acc.len();
            if i == cands.len() {
                return Ok(true);
            }
            'next: for g in &cands[i] {
                for k in 0..i {
                    if v.index.leq(k, i) && c.compose(g, v.map(k, i))? != c.compose(u.map(k, i), &acc[k])? {
                        continue 'next;
                    }
                    if v.index.leq(i, k) && c.compose(&acc[k], v.map(i, k))? != c.compose(u.map(i, k), g)? {
                        continue 'next;
                    }
                }
                acc.push(g.clone());
                if go(c, v, u, cands, acc)? {
                    return Ok(true);
                }
                acc.pop();
            }
            Ok(false)
        }
        let mut acc = Vec::new();
        if go(c, v, u, &cands, &mut acc)? {
            return Ok(ProCovering::Yes(LevelRepresentation::Levelwise(acc)));
        }
    }
    if depth == 0 {
        return Ok(ProCovering::Unknown("no levelwise witness at depth 0".into()));
    }
    let Some(mu) = u.bottom() else {
        return Ok(ProCovering::Unknown("target index has no least element".into()));
    };
    if v.bottom().is_none() {
        return Ok(ProCovering::Unknown("source index has no least element".into()));
    }
    let g = pc.germ_at_bottom(f, mu)?;
    Ok(match covers(&g)? {
        Some(true) => ProCovering::Yes(LevelRepresentation::Deepest(g)),
        Some(false) => ProCovering::No(format!("deepest germ {} is not a covering morphism", c.describe_mor(&g))),
        None => ProCovering::Unknown("covering decision leaves the budget".into()),
    })
}

/// `π*K(U) = colim_i K(U_i)`, with elements `(i, s)` named by their least
/// representative.
pub struct PullbackSheaf<'a, C: Category> {
    pub ps: &'a ProSite<C>,
    pub k: &'a Presheaf<C::Obj, C::Mor>,
}

impl<C: Category> PullbackSheaf<'_, C> {
    fn classes(&self, u: &PO<C>) -> Result<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> {
        let mut elements = Vec::new();
        let mut offset = Vec::new();
        for i in 0..u.len() {
            offset.push(elements.len());
            for s in 0..self.k.card(&u.objs[i])? {
                elements.push((i, s));
            }
        }
        let mut uf = UnionFind::new(elements.len());
        for (i, j) in u.index.pairs() {
            for s in 0..self.k.card(&u.objs[j])? {
                uf.union(offset[j] + s, offset[i] + self.k.res(u.map(i, j), s)?);
            }
        }
        let (class_of, reps) = classes(&mut uf);
        Ok((elements, class_of, reps))
    }

    /// Class representatives.
    pub fn sections(&self, u: &PO<C>) -> Result<Vec<(usize, usize)>> {
        let (elements, _, reps) = self.classes(u)?;
        Ok(reps.into_iter().map(|r| elements[r]).collect())
    }

    pub fn card(&self, u: &PO<C>) -> Result<usize> {
        Ok(self.classes(u)?.2.len())
    }

    pub fn canonical(&self, u: &PO<C>, x: (usize, usize)) -> Result<(usize, usize)> {
        let (elements, class_of, reps) = self.classes(u)?;
        let k = elements
            .iter()
            .position(|e| *e == x)
            .ok_or_else(|| Error::Malformed("section outside the colimit".into()))?;
        Ok(elements[reps[class_of[k]]])
    }

    /// Restriction along `f: V -> U`.
    pub fn restrict(&self, f: &PM<C>, x: (usize, usize)) -> Result<(usize, usize)> {
        let (j, s) = x;
        let (i, h) = &f.germs[j];
        self.canonical(&f.src, (*i, self.k.res(h, s)?))
    }
}

/// The same colimit computed over the comma category of maps `U -> C` to
/// constants, with `(C', h∘g, s') ~ (C, g, K(h)s')`. Returns the class count
/// and the class of each `(i, s)` sent along the projection to level `i`.
pub fn comma_sections<C: Category>(
    ps: &ProSite<C>,
    k: &Presheaf<C::Obj, C::Mor>,
    u: &PO<C>,
) -> Result<(usize, std::collections::BTreeMap<(usize, usize), usize>)> {
    let c = &ps.base.cat;
    let pc = &ps.pro;
    let snap = c.snapshot();
    // elements: (object, germ, section)
    let mut elements = Vec::new();
    let mut pos = std::collections::HashMap::new();
    for x in &snap {
        let germs: Vec<(usize, C::Mor)> = pc.germ_classes(u, x)?.representatives().cloned().collect();
        for g in germs {
            for s in 0..k.card(x)? {
                pos.insert((x.clone(), g.clone(), s), elements.len());
                elements.push((x.clone(), g.clone(), s));
            }
        }
    }
    let mut uf = UnionFind::new(elements.len());
    for (x, g, _) in &elements {
        for y in &snap {
            for h in c.hom(x, y)? {
                let g2 = pc.canonical_germ(u, y, (g.0, c.compose(&h, &g.1)?))?;
                for s2 in 0..k.card(y)? {
                    let a = pos[&(y.clone(), g2.clone(), s2)];
                    let b = pos[&(x.clone(), g.clone(), k.res(&h, s2)?)];
                    uf.union(a, b);
                }
            }
        }
    }
    let (class_of, reps) = classes(&mut uf);
    let mut along = std::collections::BTreeMap::new();
    for i in 0..u.len() {
        let x = &u.objs[i];
        if !c.in_snapshot(x) {
            return Err(Error::OutOfBudget(format!("level {i} leaves the snapshot")));
        }
        let g = pc.canonical_germ(u, x, (i, c.identity(x)))?;
        for s in 0..k.card(x)? {
            along.insert((i, s), class_of[pos[&(x.clone(), g.clone(), s)]]);
        }
    }
    Ok((reps.len(), along))
}

/// The two routes to `π*K` give bijective section sets on every listed
/// pro-object.
pub fn pullback_formula_check<C: Category>(
    ps: &ProSite<C>,
    k: &Presheaf<C::Obj, C::Mor>,
    objects: &[PO<C>],
) -> Result<CheckReport> {
    let pi = PullbackSheaf { ps, k };
    let mut rep = CheckReport::new();
    for (n, u) in objects.iter().enumerate() {
        let id = format!("pullback-formula.{n}");
        let (count, along) = comma_sections(ps, k, u)?;
        let (elements, class_of, reps) = pi.classes(u)?;
        // the comparison map sends each colimit class to one comma class
        let mut image = vec![None; reps.len()];
        let mut bad = None;
        for (e, (i, s)) in elements.iter().enumerate() {
            let t = along[&(*i, *s)];
            match image[class_of[e]] {
                None => image[class_of[e]] = Some(t),
                Some(t0) if t0 != t => {
                    bad = Some(format!("level-{i} section {s} is not well defined on the comparison"));
                    break;
                }
                _ => {}
            }
        }
        let hit: BTreeSet<usize> = image.iter().flatten().copied().collect();
        if bad.is_none() && (hit.len() != reps.len() || count != reps.len()) {
            bad = Some(format!("{} colimit classes against {} comma classes", reps.len(), count));
        }
        rep.push(match bad {
            Some(w) => Check::fail(id, w),
            None => Check::pass(id, format!("{count} sections on {}", ps.pro.describe_obj(u))),
        });
    }
    Ok(rep)
}

/// The equalizer condition for `π*K` on a distinguished covering.
pub fn pullback_sheaf_condition<C: FiniteLimits>(
    ps: &ProSite<C>,
    k: &Presheaf<C::Obj, C::Mor>,
    d: &Dwc<C>,
) -> Result<Option<String>> {
    let pc = &ps.pro;
    let pi = PullbackSheaf { ps, k };
    let ms = member_morphisms(ps, d)?;
    let sections = pi.sections(&d.target)?;
    let local: Vec<Vec<(usize, usize)>> = ms.iter().map(|m| pi.sections(&m.src)).collect::<Result<_>>()?;
    let mut pulls = Vec::new();
    for a in &ms {
        let mut row = Vec::new();
        for b in &ms {
            row.push(pc.pullback(a, b).map_err(missing)?);
        }
        pulls.push(row);
    }
    let restrict_all = |x: (usize, usize)| -> Result<Vec<(usize, usize)>> { ms.iter().map(|m| pi.restrict(m, x)).collect() };
    let mut images = BTreeSet::new();
    for x in &sections {
        images.insert(restrict_all(*x)?);
    }
    if images.len() != sections.len() {
        return Ok(Some("restriction to the members is not injective".into()));
    }
    // every matching family comes from a global section
    let mut fam: Vec<(usize, usize)> = Vec::new();
    fn go<C: Category>(
        pi: &PullbackSheaf<'_, C>,
        local: &[Vec<(usize, usize)>],
        pulls: &[Vec<crate::fincat::PullbackCone<PO<C>, PM<C>>>],
        fam: &mut Vec<(usize, usize)>,
        images: &BTreeSet<Vec<(usize, usize)>>,
    ) -> Result<Option<String>> {
        let w = fam.len();
        if w == local.len() {
            return Ok(if images.contains(fam) {
                None
            } else {
                Some(format!("matching family {fam:?} has no global section"))
            });
        }
        'next: for x in &local[w] {
            for (v, y) in fam.iter().enumerate() {
                let p = &pulls[v][w];
                if pi.restrict(&p.left, *y)? != pi.restrict(&p.right, *x)? {
                    continue 'next;
                }
            }
            // self-agreement on the diagonal pullback
            let p = &pulls[w][w];
            if pi.restrict(&p.left, *x)? != pi.restrict(&p.right, *x)? {
                continue;
            }
            fam.push(*x);
            if let Some(e) = go(pi, local, pulls, fam, images)? {
                return Ok(Some(e));
            }
            fam.pop();
        }
        Ok(None)
    }
    go(&pi, &local, &pulls, &mut fam, &images)
}

/// `Mor(U,W) -> Mor(V,W) ⇉ Mor(V ×_U V, W)` is an equalizer.
pub fn equalizer_check<C: FiniteLimits>(ps: &ProSite<C>, f: &PM<C>, w: &PO<C>) -> Result<CheckReport> {
    let pc = &ps.pro;
    match is_pro_covering(ps, f, ps.depth.max(1))? {
        ProCovering::Yes(_) => {}
        other => {
            return Err(Error::Precondition(format!(
                "equalizer lemma needs a pro-covering, got {}",
                other.as_str()
            )))
        }
    }
    let pb = pc.pullback(f, f).map_err(missing)?;
    let hu = hom_set(pc, &f.dst, w)?;
    let hv = hom_set(pc, &f.src, w)?;
    let mut images = BTreeSet::new();
    for g in &hu {
        images.insert(pc.compose(g, f)?);
    }
    let mut equalized = BTreeSet::new();
    for h in hv {
        if pc.compose(&h, &pb.left)? == pc.compose(&h, &pb.right)? {
            equalized.insert(h);
        }
    }
    let mut rep = CheckReport::new();
    let id = "equalizer";
    rep.push(if images.len() != hu.len() {
        Check::fail(id, "Mor(U,W) -> Mor(V,W) is not injective")
    } else if images != equalized {
        Check::fail(
            id,
            format!("{} maps factor through U but {} equalize the projections", images.len(), equalized.len()),
        )
    } else {
        Check::pass(id, format!("|Mor(U,W)| = {} = |equalizer|", hu.len()))
    });
    Ok(rep)
}

/// K-sets for probe pro-objects: `D ×_{F(i)} F -> F` for `D -> F(i)` from the
/// base K-set at each level.
pub fn pro_k_sets<C: FiniteLimits>(ps: &ProSite<C>) -> Result<Vec<(PO<C>, Vec<PM<C>>)>> {
    let pc = &ps.pro;
    let base_k = generate_k(&ps.base)?;
    let mut out = Vec::new();
    for f in pc.probes() {
        let mut ks: Vec<PM<C>> = Vec::new();
        for i in 0..f.len() {
            let Some(base) = base_k.get(&f.objs[i]) else { continue };
            let proj = pc.projection(f, i)?;
            for d in base {
                let cone = pc.pullback(&proj, &pc.constant_map(d)?).map_err(missing)?;
                if !ks.contains(&cone.left) {
                    ks.push(cone.left);
                }
            }
        }
        out.push((f.clone(), ks));
    }
    Ok(out)
}

/// Every pro-covering from a probe onto `F` is refined by some member of `K(F)`.
pub fn verify_pro_k<C: FiniteLimits>(ps: &ProSite<C>, ks: &[(PO<C>, Vec<PM<C>>)]) -> Result<CheckReport> {
    let pc = &ps.pro;
    let mut rep = CheckReport::new();
    for (n, (f, k)) in ks.iter().enumerate() {
        let id = format!("pro-smallness.{n}");
        let mut bad = None;
        for d in k {
            if !is_pro_covering(ps, d, ps.depth.max(1))?.is_yes() {
                bad = Some(format!("K-set member {} is not a pro-covering", pc.describe_mor(d)));
                break;
            }
        }
        let mut tested = 0;
        'probes: for p in pc.probes() {
            if bad.is_some() {
                break;
            }
            for e in hom_set(pc, p, f)? {
                if !is_pro_covering(ps, &e, ps.depth.max(1))?.is_yes() {
                    continue;
                }
                tested += 1;
                let mut refined = false;
                for d in k {
                    if !pc.lift_along(&e, d)?.is_empty() {
                        refined = true;
                        break;
                    }
                }
                if !refined {
                    bad = Some(format!("pro-covering {} is refined by no K-set member", pc.describe_mor(&e)));
                    break 'probes;
                }
            }
        }
        rep.push(match bad {
            Some(w) => Check::fail(id, w),
            None => Check::pass(id, format!("{} coverings refined by {} members", tested, k.len())),
        });
    }
    Ok(rep)
}

pub fn check_pro_smallness<C: FiniteLimits>(ps: &ProSite<C>) -> Result<CheckReport> {
    verify_pro_k(ps, &pro_k_sets(ps)?)
}

/// Coproduct injections, `∐ members -> target` and coproducts of steps are
/// distinguished, on probe pro-objects with a final level.
pub fn coproduct_covering_facts<C: FiniteLimits + FiniteCoproducts>(ps: &ProSite<C>) -> Result<CheckReport> {
    let pc = &ps.pro;
    let probes: Vec<PO<C>> = pc.probes().iter().filter(|p| p.index.maximum().is_some()).cloned().collect();
    let mut rep = CheckReport::new();

    // injections into finite coproducts
    let (mut ok, mut outside, mut failure) = (0usize, 0usize, None);
    for a in &probes {
        for b in probes.iter().filter(|b| b.index == a.index) {
            let parts = [a.clone(), b.clone()];
            let Ok((sum, cocones)) = levelwise_coproduct(ps, &parts) else {
                outside += 1;
                continue;
            };
            let top = final_level(&sum)?;
            let fam = CoveringFamily {
                target: sum.objs[top].clone(),
                members: cocones[top].injections.clone(),
            };
            let d = match make_weak_covering(ps, &sum, &fam) {
                Ok(d) => d,
                Err(Error::Absent(_)) | Err(Error::OutOfBudget(_)) => {
                    outside += 1;
                    continue;
                }
                Err(Error::Precondition(m)) => {
                    failure.get_or_insert(format!("injections into {} do not cover: {m}", pc.describe_obj(&sum)));
                    continue;
                }
                Err(e) => return Err(e),
            };
            for (w, part) in parts.iter().enumerate() {
                let inj = levelwise(ps, part, &sum, &cocones.iter().map(|k| k.injections[w].clone()).collect::<Vec<_>>())?;
                let m = member_morphism(ps, &d, w)?;
                let isos: Vec<PM<C>> = pc
                    .lift_along(&m, &inj)?
                    .into_iter()
                    .filter(|phi| pc.is_iso(phi).unwrap_or(false))
                    .collect();
                if isos.is_empty() {
                    failure.get_or_insert(format!("member {w} over {} is not the injection", pc.describe_obj(&sum)));
                }
            }
            ok += 1;
        }
    }
    rep.push_scoped("coproduct.injections", failure, ok, outside);

    // ∐ of a covering's members maps onto the target by a distinguished step
    let (mut ok, mut outside, mut failure) = (0usize, 0usize, None);
    for f in &probes {
        let top = final_level(f)?;
        for fam in ps.base.families(&f.objs[top])?.iter().filter(|fam| !fam.members.is_empty()) {
            let built = make_weak_covering(ps, f, fam).and_then(|d| copair_step(ps, &d));
            let step = match built {
                Ok(s) => s,
                Err(Error::Absent(_)) | Err(Error::OutOfBudget(_)) => {
                    outside += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            match verify_weak_covering(ps, &step) {
                Ok(None) => ok += 1,
                Ok(Some(w)) => {
                    failure.get_or_insert(format!("{}: {w}", pc.describe_obj(f)));
                }
                Err(Error::Absent(_)) | Err(Error::OutOfBudget(_)) => outside += 1,
                Err(e) => return Err(e),
            }
        }
    }
    rep.push_scoped("coproduct.members", failure, ok, outside);

    // finite coproducts of distinguished steps
    let (mut ok, mut outside, mut failure) = (0usize, 0usize, None);
    let mut steps: Vec<Dwc<C>> = Vec::new();
    for f in &probes {
        let top = final_level(f)?;
        for e in ps.base.covering_morphisms_onto(&f.objs[top])? {
            if let Ok(d) = weak_step(ps, f, &e) {
                steps.push(d);
            }
        }
    }
    for a in &steps {
        for b in steps.iter().filter(|b| b.target.index == a.target.index) {
            let step = match coproduct_step(ps, &[a.clone(), b.clone()]) {
                Ok(s) => s,
                Err(Error::Absent(_)) | Err(Error::OutOfBudget(_)) => {
                    outside += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            match verify_weak_covering(ps, &step) {
                Ok(None) => ok += 1,
                Ok(Some(w)) => {
                    failure.get_or_insert(format!("{} ⊔ {}: {w}", pc.describe_obj(&a.target), pc.describe_obj(&b.target)));
                }
                Err(Error::Absent(_)) | Err(Error::OutOfBudget(_)) => outside += 1,
                Err(e) => return Err(e),
            }
        }
    }
    rep.push_scoped("coproduct.steps", failure, ok, outside);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{GSet, GSetCategory, GSetMap};
    use crate::sheaf::yoneda;
    use crate::site::{jointly_surjective, Basis};

    fn bg2() -> ProSite<GSetCategory> {
        let base = SiteSpec::new(
            GSetCategory::z2(6),
            Basis::Rule {
                name: "jointly-surjective".into(),
                max_members: Some(2),
                accepts: jointly_surjective,
            },
        );
        ProSite::new(base, Topology::Weak, 3).unwrap()
    }

    fn g_to_point(c: &GSetCategory) -> GSetMap {
        c.to_terminal(&c.free_orbit()).unwrap()
    }

    fn two_g(c: &GSetCategory) -> GSet {
        c.from_counts(&[0, 2]).unwrap()
    }

    fn fam(target: GSet, members: Vec<GSetMap>) -> CoveringFamily<GSet, GSetMap> {
        CoveringFamily { target, members }
    }

    #[test]
    fn weak_coverings_of_constants_and_chains() {
        let ps = bg2();
        let c = &ps.base.cat;
        let pt = ps.pro.constant(&c.point());
        let d = make_weak_covering(&ps, &pt, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        assert_eq!(d.members, vec![ps.pro.constant(&c.free_orbit())]);
        assert_eq!(verify_weak_covering(&ps, &d).unwrap(), None);
        let id = make_weak_covering(&ps, &pt, &fam(c.point(), vec![c.identity(&c.point())])).unwrap();
        assert_eq!(id.members, vec![pt.clone()]);
        // a 2-chain G -> * pulled back along G -> * gives the chain 2G -> G
        let chain = ProObject::chain(c, &[g_to_point(c)]).unwrap();
        let d = make_weak_covering(&ps, &chain, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        assert_eq!(d.members[0].objs, vec![two_g(c), c.free_orbit()]);
        assert_eq!(verify_weak_covering(&ps, &d).unwrap(), None);
        let none = make_weak_covering(&ps, &pt, &fam(c.point(), vec![c.initial_map(&c.point()).unwrap()]));
        assert!(matches!(none, Err(Error::Precondition(_))));
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let ps = bg2();
        let c = &ps.base.cat;
        let pt = ps.pro.constant(&c.point());
        let mut d = make_weak_covering(&ps, &pt, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        d.members[0] = ps.pro.constant(&two_g(c));
        assert!(verify_weak_covering(&ps, &d).unwrap().is_some());
    }

    #[test]
    fn weak_composition() {
        let ps = bg2();
        let c = &ps.base.cat;
        let pt = ps.pro.constant(&c.point());
        let outer = make_weak_covering(&ps, &pt, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        let inner = identity_covering(&ps, &outer.members[0]).unwrap();
        let out = compose_weak(&ps, &outer, &[inner]).unwrap();
        assert_eq!(out.members, outer.members);
        // a proper inner refinement: 2G -> G folding
        let fold = c.map(&two_g(c), &c.free_orbit(), vec![0, 1, 0, 1]).unwrap();
        let inner = make_weak_covering(&ps, &outer.members[0], &fam(c.free_orbit(), vec![fold])).unwrap();
        let out = compose_weak(&ps, &outer, &[inner]).unwrap();
        assert_eq!(out.members, vec![ps.pro.constant(&two_g(c))]);
    }

    #[test]
    fn transfinite_coverings() {
        let ps = bg2();
        let c = &ps.base.cat;
        let pt = ps.pro.constant(&c.point());
        let top = make_weak_covering(&ps, &pt, &fam(c.point(), vec![g_to_point(c), g_to_point(c)])).unwrap();
        let outer = make_transfinite_covering(&ps, &pt, vec![], top.clone()).unwrap();
        assert_eq!(transfinite_members(&ps, &outer).unwrap(), member_morphisms(&ps, &top).unwrap());
        let g = ps.pro.constant(&c.free_orbit());
        let swap = c.map(&c.free_orbit(), &c.free_orbit(), vec![1, 0]).unwrap();
        let inner = || {
            let s = weak_step(&ps, &g, &swap).unwrap();
            let t = identity_covering(&ps, &s.members[0]).unwrap();
            make_transfinite_covering(&ps, &g, vec![s], t).unwrap()
        };
        let out = compose_transfinite(&ps, &outer, &[inner(), inner()]).unwrap();
        assert_eq!(out.chain_length(), 2);
        assert_eq!(out.stages()[1], ps.pro.constant(&two_g(c)));
        for m in transfinite_members(&ps, &out).unwrap() {
            assert!(is_pro_covering(&ps, &m, 1).unwrap().is_yes());
        }
        let trivial = |x: &PO<GSetCategory>| make_transfinite_covering(&ps, x, vec![], identity_covering(&ps, x).unwrap()).unwrap();
        let out = compose_transfinite(&ps, &outer, &[trivial(&g), trivial(&g)]).unwrap();
        assert_eq!(out.chain_length(), 1);
    }

    #[test]
    fn pro_covering_decisions() {
        let ps = bg2();
        let c = &ps.base.cat;
        let f = ps.pro.constant_map(&g_to_point(c)).unwrap();
        assert!(is_pro_covering(&ps, &f, 0).unwrap().is_yes());
        let e = ps.pro.constant_map(&c.initial_map(&c.point()).unwrap()).unwrap();
        assert!(matches!(is_pro_covering(&ps, &e, 1).unwrap(), ProCovering::No(_)));
        assert!(matches!(is_pro_covering(&ps, &e, 0).unwrap(), ProCovering::Unknown(_)));
        let chain = ProObject::chain(c, &[g_to_point(c)]).unwrap();
        let d = make_weak_covering(&ps, &chain, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        assert!(matches!(
            is_pro_covering(&ps, &member_morphism(&ps, &d, 0).unwrap(), 0).unwrap(),
            ProCovering::Yes(LevelRepresentation::Levelwise(_))
        ));
    }

    #[test]
    fn equalizer_on_free_orbit_covering() {
        let ps = bg2();
        let c = &ps.base.cat;
        let f = ps.pro.constant_map(&g_to_point(c)).unwrap();
        let w = ps.pro.constant(&two_g(c));
        let rep = equalizer_check(&ps, &f, &w).unwrap();
        assert_eq!(rep.verdict(), crate::Verdict::Pass);
        // fixed points of 2G: none, so Mor(*, 2G) is empty
        assert!(rep.checks[0].details.contains("= 0"));
        let id = ps.pro.identity(&w);
        assert_eq!(equalizer_check(&ps, &id, &w).unwrap().verdict(), crate::Verdict::Pass);
        let e = ps.pro.constant_map(&c.initial_map(&c.point()).unwrap()).unwrap();
        assert!(matches!(equalizer_check(&ps, &e, &w), Err(Error::Precondition(_))));
    }

    #[test]
    fn pullback_sheaf_routes_agree() {
        let ps = bg2();
        let c = &ps.base.cat;
        let k = yoneda(c, &c.free_orbit()).unwrap();
        let pi = PullbackSheaf { ps: &ps, k: &k };
        let g = ps.pro.constant(&c.free_orbit());
        assert_eq!(pi.card(&g).unwrap(), 2);
        let chain = ProObject::chain(c, &[g_to_point(c)]).unwrap();
        // y(G) along the chain G -> *: colimit is y(G)(G)
        let target = ps.pro.constant(&c.free_orbit());
        assert_eq!(pi.card(&chain).unwrap(), hom_set(&ps.pro, &chain, &target).unwrap().len());
        let rep = pullback_formula_check(&ps, &k, ps.pro.probes()).unwrap();
        assert_eq!(rep.verdict(), crate::Verdict::Pass, "{:?}", rep.first_failure());
        let pt = ps.pro.constant(&c.point());
        let d = make_weak_covering(&ps, &pt, &fam(c.point(), vec![g_to_point(c)])).unwrap();
        assert_eq!(pullback_sheaf_condition(&ps, &k, &d).unwrap(), None);
    }

    #[test]
    fn smallness_and_coproduct_facts() {
        let ps = bg2();
        let rep = check_pro_smallness(&ps).unwrap();
        assert_eq!(rep.verdict(), crate::Verdict::Pass, "{:?}", rep.first_failure());
        let mut ks = pro_k_sets(&ps).unwrap();
        // the point has a nontrivial covering, so an empty K-set must fail
        let pt = ps.pro.constant(&ps.base.cat.point());
        ks.iter_mut().find(|(f, _)| *f == pt).unwrap().1.clear();
        assert_eq!(verify_pro_k(&ps, &ks).unwrap().verdict(), crate::Verdict::Fail);
        let rep = coproduct_covering_facts(&ps).unwrap();
        assert!(rep.passes_within_budget(), "{:?}", rep.first_failure());
    }
}
