//! Weak contractibility, the `P(U)` construction and exactness of sections.
//!
//! Contractibility is always scoped: a witness records which covering
//! morphisms were enumerated, and only those.

use std::collections::BTreeMap;

use crate::cohom::{fixed_point_map, is_homomorphism, short_exact_failure, AbelianPresheaf, FixedPointModule, GModule};
use crate::fincat::{Category, FiniteLimits, GSet, GSetCategory, WideCone};
use crate::linalg::{IntMatrix, PresentedGroup};
use crate::pro::{hom_set, pro_isomorphism, ProMorphism, ProObject};
use crate::protop::{identity_covering, make_transfinite_covering, member_morphism, weak_step, Dwc, ProSite, Tc};
use crate::sheaf::Presheaf;
use crate::site::{KSelection, SiteSpec};
use crate::verdict::{Check, CheckReport};
use crate::{Error, Result};

type PO<C> = ProObject<<C as Category>::Obj, <C as Category>::Mor>;
type PM<C> = ProMorphism<<C as Category>::Obj, <C as Category>::Mor>;

/// Which covering morphisms a contractibility verdict quantifies over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    /// Every covering morphism in the snapshot onto the object, this many.
    Enumerated(usize),
    /// Enumeration left the budget; the verdict is unknown.
    Truncated(String),
}

/// Splittings `s` with `e ∘ s = id` for each enumerated covering morphism
/// `e`, or the first `e` without one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractibilityWitness<O, M> {
    pub object: O,
    pub splittings: Vec<(M, M)>,
    pub failure: Option<M>,
    pub scope: Scope,
}

impl<O, M> ContractibilityWitness<O, M> {
    /// `None` when the enumeration was truncated before a failure.
    pub fn is_contractible(&self) -> Option<bool> {
        match (&self.failure, &self.scope) {
            (Some(_), _) => Some(false),
            (None, Scope::Truncated(_)) => None,
            (None, Scope::Enumerated(_)) => Some(true),
        }
    }
}

/// Re-checks every recorded splitting.
pub fn verify_witness<C: Category>(c: &C, w: &ContractibilityWitness<C::Obj, C::Mor>) -> Result<bool> {
    let id = c.identity(&w.object);
    for (e, s) in &w.splittings {
        if c.target(e) != w.object || c.compose(e, s)? != id {
            return Ok(false);
        }
    }
    Ok(true)
}

fn split_all<C: Category>(
    c: &C,
    object: C::Obj,
    covers: Result<Vec<C::Mor>>,
) -> Result<ContractibilityWitness<C::Obj, C::Mor>> {
    let covers = match covers {
        Ok(v) => v,
        Err(Error::OutOfBudget(m)) => {
            return Ok(ContractibilityWitness {
                object,
                splittings: vec![],
                failure: None,
                scope: Scope::Truncated(m),
            })
        }
        Err(e) => return Err(e),
    };
    let id = c.identity(&object);
    let mut splittings = Vec::new();
    for e in &covers {
        match c.lift_along(e, &id)?.into_iter().next() {
            Some(s) => splittings.push((e.clone(), s)),
            None => {
                return Ok(ContractibilityWitness {
                    object,
                    splittings,
                    failure: Some(e.clone()),
                    scope: Scope::Enumerated(covers.len()),
                })
            }
        }
    }
    Ok(ContractibilityWitness {
        object,
        splittings,
        failure: None,
        scope: Scope::Enumerated(covers.len()),
    })
}

/// Every snapshot covering morphism onto `u` splits.
pub fn is_weakly_contractible<C: Category>(s: &SiteSpec<C>, u: &C::Obj) -> Result<ContractibilityWitness<C::Obj, C::Mor>> {
    split_all(&s.cat, u.clone(), s.covering_morphisms_onto(u))
}

/// Pro-site form: every weak step onto `u` by a base covering morphism of
/// its final level splits in the pro-category.
pub fn is_weakly_contractible_pro<C: FiniteLimits>(ps: &ProSite<C>, u: &PO<C>) -> Result<ContractibilityWitness<PO<C>, PM<C>>> {
    let top = u
        .index
        .maximum()
        .ok_or_else(|| Error::Precondition("index has no final element".into()))?;
    let covers = ps.base.covering_morphisms_onto(&u.objs[top]).and_then(|es| {
        es.iter()
            .map(|e| member_morphism(ps, &weak_step(ps, u, e)?, 0))
            .collect::<Result<Vec<_>>>()
    });
    split_all(&ps.pro, u.clone(), covers)
}

/// The weakly contractible snapshot objects, or the first object whose
/// enumeration left the budget.
pub fn contractible_objects<C: Category>(s: &SiteSpec<C>) -> Result<std::result::Result<Vec<C::Obj>, C::Obj>> {
    let mut out = Vec::new();
    for x in s.cat.snapshot() {
        match is_weakly_contractible(s, &x)?.is_contractible() {
            Some(true) => out.push(x),
            Some(false) => {}
            None => return Ok(Err(x)),
        }
    }
    Ok(Ok(out))
}

/// One round of the construction over `u`.
#[derive(Debug, Clone)]
pub struct PRound<O: Ord, M: Ord> {
    pub input: ProObject<O, M>,
    /// The non-identity members of `K(u(top))` in use.
    pub k_used: Vec<M>,
    /// Tower realisation `V_n -> ... -> V_0 = u`.
    pub steps: Vec<DwcOf<O, M>>,
    /// The fiber product over `u` of the `u ×_{u(top)} D` for `D` in `k_used`.
    pub comma: WideCone<ProObject<O, M>, ProMorphism<O, M>>,
    /// Isomorphism from the last tower stage to the comma apex, over `u`.
    pub comparison: ProMorphism<O, M>,
}

pub type DwcOf<O, M> = crate::protop::DistinguishedWeakCovering<O, M>;

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> PRound<O, M> {
    pub fn output(&self) -> ProObject<O, M> {
        self.steps.last().map_or_else(|| self.input.clone(), |d| d.members[0].clone())
    }
}

#[derive(Debug, Clone)]
pub struct PTowerRecord<O: Ord, M: Ord> {
    pub u: ProObject<O, M>,
    pub rounds: Vec<PRound<O, M>>,
    /// All tower steps as one transfinite covering `P^i(u) -> u`.
    pub covering: crate::protop::TransfiniteCovering<O, M>,
    /// Least `j` with `P^{j+1}(u) ≅ P^j(u)`, when seen.
    pub stabilized_at: Option<usize>,
}

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> PTowerRecord<O, M> {
    pub fn iterations(&self) -> usize {
        self.rounds.len()
    }

    pub fn result(&self) -> ProObject<O, M> {
        self.rounds.last().map_or_else(|| self.u.clone(), |r| r.output())
    }
}

fn final_level<C: Category>(u: &PO<C>) -> Result<usize> {
    u.index
        .maximum()
        .ok_or_else(|| Error::Precondition("index has no final element".into()))
}

fn k_set<C: Category>(c: &C, k: &KSelection<C::Obj, C::Mor>, x: &C::Obj) -> Result<Vec<C::Mor>> {
    let ks = k
        .get(x)
        .ok_or_else(|| Error::Precondition(format!("no K-set for {}", c.describe_obj(x))))?;
    Ok(ks.iter().filter(|d| **d != c.identity(x)).cloned().collect())
}

/// `V_i = V_{i-1} ×_{u(top)} D_i` as weak steps, compared with the comma
/// product.
fn p_round<C: FiniteLimits>(ps: &ProSite<C>, u: &PO<C>, k: &KSelection<C::Obj, C::Mor>) -> Result<PRound<C::Obj, C::Mor>> {
    let c = &ps.base.cat;
    let pc = &ps.pro;
    let top = final_level::<C>(u)?;
    let k_used = k_set(c, k, &u.objs[top])?;
    let mut steps: Vec<Dwc<C>> = Vec::new();
    let mut stage = u.clone();
    let mut to_u_top = c.identity(&u.objs[top]);
    for d in &k_used {
        let pb = c.pullback(&to_u_top, d).map_err(|e| match e {
            Error::OutOfBudget(m) | Error::Absent(m) => Error::OutOfBudget(format!("fiber product outside the snapshot: {m}")),
            e => e,
        })?;
        let step = weak_step(ps, &stage, &pb.left)?;
        to_u_top = c.compose(&to_u_top, &step.legs[0][top])?;
        stage = step.members[0].clone();
        steps.push(step);
    }
    let arms: Vec<PM<C>> = if k_used.is_empty() {
        vec![pc.identity(u)]
    } else {
        k_used
            .iter()
            .map(|d| member_morphism(ps, &weak_step(ps, u, d)?, 0))
            .collect::<Result<_>>()?
    };
    let comma = pc.wide_pullback(&arms)?;
    let mut to_u = pc.identity(u);
    for s in &steps {
        to_u = pc.compose(&to_u, &member_morphism(ps, s, 0)?)?;
    }
    let comma_to_u = pc.compose(&arms[0], &comma.legs[0])?;
    let mut comparison = None;
    for h in hom_set(pc, &stage, &comma.apex)? {
        if pc.compose(&comma_to_u, &h)? == to_u && pc.is_iso(&h)? {
            comparison = Some(h);
            break;
        }
    }
    let comparison = comparison.ok_or_else(|| Error::ConstructionFailed {
        step: steps.len(),
        reason: "tower realisation is not isomorphic to the comma product over U".into(),
    })?;
    Ok(PRound {
        input: u.clone(),
        k_used,
        steps,
        comma,
        comparison,
    })
}

fn assemble<C: FiniteLimits>(ps: &ProSite<C>, u: &PO<C>, rounds: Vec<PRound<C::Obj, C::Mor>>, stabilized_at: Option<usize>) -> Result<PTowerRecord<C::Obj, C::Mor>> {
    let steps: Vec<Dwc<C>> = rounds.iter().flat_map(|r| r.steps.iter().cloned()).collect();
    let last = steps.last().map_or_else(|| u.clone(), |d| d.members[0].clone());
    let covering: Tc<C> = make_transfinite_covering(ps, u, steps, identity_covering(ps, &last)?)?;
    Ok(PTowerRecord {
        u: u.clone(),
        rounds,
        covering,
        stabilized_at,
    })
}

pub fn build_p<C: FiniteLimits>(ps: &ProSite<C>, u: &PO<C>, k: &KSelection<C::Obj, C::Mor>) -> Result<PTowerRecord<C::Obj, C::Mor>> {
    iterate_p(ps, u, k, 1)
}

/// `P^i(u)`, stopping early once `P^{j+1}(u) ≅ P^j(u)`.
pub fn iterate_p<C: FiniteLimits>(ps: &ProSite<C>, u: &PO<C>, k: &KSelection<C::Obj, C::Mor>, i: usize) -> Result<PTowerRecord<C::Obj, C::Mor>> {
    if i == 0 {
        return Err(Error::Precondition("at least one iteration".into()));
    }
    let mut rounds = Vec::new();
    let mut current = u.clone();
    let mut stabilized_at = None;
    for j in 0..i {
        let r = p_round(ps, &current, k)?;
        let next = r.output();
        rounds.push(r);
        if pro_isomorphism(&ps.pro, &next, &current)?.is_some() {
            stabilized_at = Some(j);
            break;
        }
        current = next;
    }
    assemble(ps, u, rounds, stabilized_at)
}

/// Splits every weak step onto `X = P^i(u)` through the factorization
/// `P(X) -> W_δ -> V -> X` with `δ` in `K(X(top))` refining the step.
pub fn check_p_contractible<C: FiniteLimits>(
    ps: &ProSite<C>,
    rec: &PTowerRecord<C::Obj, C::Mor>,
    k: &KSelection<C::Obj, C::Mor>,
) -> Result<CheckReport> {
    let c = &ps.base.cat;
    let pc = &ps.pro;
    let mut report = CheckReport::new();
    let x = rec.result();
    let Some(j) = rec.stabilized_at else {
        report.push(Check::unverified("p-contractible", "record has not stabilized"));
        return Ok(report);
    };
    report.push(Check::pass("p-contractible.stabilized", format!("P^{} ≅ P^{j}", j + 1)));
    let top = final_level::<C>(&x)?;
    let px = p_round(ps, &x, k)?;
    let mut pi = pc.identity(&x);
    for s in &px.steps {
        pi = pc.compose(&pi, &member_morphism(ps, s, 0)?)?;
    }
    let Some(pi_inv) = pc.lift_along(&pi, &pc.identity(&x))?.into_iter().find(|h| pc.compose(h, &pi).ok() == Some(pc.identity(&px.output()))) else {
        report.push(Check::unverified("p-contractible", "P(X) -> X is not invertible"));
        return Ok(report);
    };
    let covers = match ps.base.covering_morphisms_onto(&x.objs[top]) {
        Ok(v) => v,
        Err(Error::OutOfBudget(m)) => {
            report.push(Check::unverified("p-contractible", m));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let ks = k
        .get(&x.objs[top])
        .ok_or_else(|| Error::Precondition("no K-set at the final level".into()))?;
    let mut failure = None;
    for e in &covers {
        let v = weak_step(ps, &x, e)?;
        let ve = member_morphism(ps, &v, 0)?;
        let mut found = None;
        for delta in ks {
            if let Some(h) = c.lift_along(e, delta)?.into_iter().next() {
                found = Some((delta.clone(), h));
                break;
            }
        }
        let Some((delta, h)) = found else {
            failure = Some(format!("no member of K refines {}", c.describe_mor(e)));
            break;
        };
        // P(X) -> W_δ
        let (w, p_to_w) = if delta == c.identity(&x.objs[top]) {
            (identity_covering(ps, &x)?, pi.clone())
        } else {
            let a = px.k_used.iter().position(|d| *d == delta).expect("δ is a non-identity K member");
            let w = weak_step(ps, &x, &delta)?;
            (w, pc.compose(&px.comma.legs[a], &px.comparison)?)
        };
        // W_δ -> V levelwise by (leg, h ∘ to_base)
        let levels = (0..x.len())
            .map(|l| {
                let cone = c.pullback(x.map(l, top), e)?;
                c.pullback_mediate(&cone, &w.legs[0][l], &c.compose(&h, &w.to_base[0][l])?)
            })
            .collect::<Result<Vec<_>>>()?;
        let w_to_v = crate::protop::levelwise(ps, &w.members[0], &v.members[0], &levels)?;
        let s = pc.compose(&pc.compose(&w_to_v, &p_to_w)?, &pi_inv)?;
        if pc.compose(&ve, &s)? != pc.identity(&x) {
            failure = Some(format!("factorization through {} does not split", c.describe_mor(e)));
            break;
        }
    }
    report.push_scoped("p-contractible", failure, covers.len(), 0);
    Ok(report)
}

/// Compatible families `(s_a)` indexed by arrows `a: D -> x` from
/// contractible `D`: `s_{a∘g} = F(g)(s_a)` for `g` between contractibles.
fn ran_sections<C: Category>(
    c: &C,
    f: &Presheaf<C::Obj, C::Mor>,
    contractible: &[C::Obj],
    x: &C::Obj,
) -> Result<(usize, Vec<Vec<usize>>)> {
    let mut arrows = Vec::new();
    for d in contractible {
        arrows.extend(c.hom(d, x)?);
    }
    let index: BTreeMap<C::Mor, usize> = arrows.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    // links[a] = (b, g) with b = a ∘ g
    let mut links: Vec<Vec<(usize, C::Mor)>> = vec![Vec::new(); arrows.len()];
    for (i, a) in arrows.iter().enumerate() {
        for d in contractible {
            for g in c.hom(d, &c.source(a))? {
                let b = index[&c.compose(a, &g)?];
                links[i].push((b, g));
            }
        }
    }
    let cards = arrows.iter().map(|a| f.card(&c.source(a))).collect::<Result<Vec<_>>>()?;
    let mut solutions = Vec::new();
    // every assigned arrow is propagated along its links, so complete
    // assignments are compatible families
    fn propagate<C: Category>(
        f: &Presheaf<C::Obj, C::Mor>,
        links: &[Vec<(usize, C::Mor)>],
        assign: &mut [Option<usize>],
        start: usize,
    ) -> Result<bool> {
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            let sa = assign[a].expect("assigned before propagation");
            for (b, g) in &links[a] {
                let sb = f.res(g, sa)?;
                match assign[*b] {
                    Some(t) if t != sb => return Ok(false),
                    Some(_) => {}
                    None => {
                        assign[*b] = Some(sb);
                        stack.push(*b);
                    }
                }
            }
        }
        Ok(true)
    }
    fn go<C: Category>(
        f: &Presheaf<C::Obj, C::Mor>,
        links: &[Vec<(usize, C::Mor)>],
        cards: &[usize],
        assign: Vec<Option<usize>>,
        solutions: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if solutions.len() > crate::sheaf::ENUMERATION_BUDGET {
            return Err(Error::OutOfBudget("too many compatible families".into()));
        }
        let Some(a) = assign.iter().position(|s| s.is_none()) else {
            solutions.push(assign.into_iter().map(|s| s.expect("complete")).collect());
            return Ok(());
        };
        for v in 0..cards[a] {
            let mut next = assign.clone();
            next[a] = Some(v);
            if propagate::<C>(f, links, &mut next, a)? {
                go::<C>(f, links, cards, next, solutions)?;
            }
        }
        Ok(())
    }
    go::<C>(f, &links, &cards, vec![None; arrows.len()], &mut solutions)?;
    Ok((solutions.len(), solutions))
}

/// Restriction to weakly contractible objects followed by right Kan
/// extension recovers each probe sheaf.
pub fn dc_restriction_check<C: Category>(s: &SiteSpec<C>, probes: &[(String, Presheaf<C::Obj, C::Mor>)]) -> Result<CheckReport> {
    let c = &s.cat;
    let mut report = CheckReport::new();
    let contractible = match contractible_objects(s)? {
        Ok(v) => v,
        Err(x) => {
            report.push(Check::unverified("dc-restriction", format!("contractibility of {} is unknown", c.describe_obj(&x))));
            return Ok(report);
        }
    };
    for x in c.snapshot() {
        let covers = s.covering_morphisms_onto(&x)?;
        if !covers.iter().any(|e| contractible.contains(&c.source(e))) {
            report.push(Check::unverified(
                "dc-restriction",
                format!("{} has no covering morphism from a contractible", c.describe_obj(&x)),
            ));
            return Ok(report);
        }
    }
    report.push(Check::pass(
        "dc-restriction.contractibles",
        contractible.iter().map(|x| c.describe_obj(x)).collect::<Vec<_>>().join(","),
    ));
    for (name, f) in probes {
        let mut failure = None;
        let mut n = 0;
        for x in c.snapshot() {
            let (count, families) = ran_sections(c, f, &contractible, &x)?;
            let mut arrows = Vec::new();
            for d in &contractible {
                arrows.extend(c.hom(d, &x)?);
            }
            let card = f.card(&x)?;
            let mut canonical = Vec::new();
            for sx in 0..card {
                canonical.push(arrows.iter().map(|a| f.res(a, sx)).collect::<Result<Vec<_>>>()?);
            }
            canonical.sort();
            canonical.dedup();
            let mut fams = families;
            fams.sort();
            if count != card || canonical != fams {
                failure = Some(format!("{name} at {}: {card} sections, {count} families", c.describe_obj(&x)));
                break;
            }
            n += 1;
        }
        report.push_scoped(&format!("dc-restriction.{name}"), failure, n, 0);
    }
    Ok(report)
}

/// `0 -> a -α-> b -β-> c -> 0` of G-modules, read as abelian sheaves
/// `Hom_G(-, M)` on finite G-sets.
#[derive(Debug, Clone)]
pub struct ShortExactSequence {
    pub name: String,
    pub a: GModule,
    pub b: GModule,
    pub c: GModule,
    pub alpha: IntMatrix,
    pub beta: IntMatrix,
}

fn equivariant(m: &GModule, n: &GModule, phi: &IntMatrix) -> bool {
    is_homomorphism(&m.module, &n.module, phi)
        && m.group.elements().all(|g| crate::cohom::homs_equal(&n.module, &phi.mul(&m.action[g]), &n.action[g].mul(phi)))
}

impl ShortExactSequence {
    /// `0 -> Z -×2-> Z -> Z/2 -> 0` with trivial action.
    pub fn doubling(group: crate::fincat::FiniteGroup) -> Self {
        ShortExactSequence {
            name: "doubling".into(),
            a: GModule::trivial(group.clone(), PresentedGroup::free(1)),
            b: GModule::trivial(group.clone(), PresentedGroup::free(1)),
            c: GModule::trivial(group, PresentedGroup::cyclic(1, 2)),
            alpha: IntMatrix::from_rows(&[vec![2]]),
            beta: IntMatrix::from_rows(&[vec![1]]),
        }
    }

    /// `0 -> Z_sign -> Z[Z/2] -> Z -> 0` with the augmentation.
    pub fn augmentation() -> Self {
        let g = crate::fincat::FiniteGroup::cyclic(2);
        ShortExactSequence {
            name: "augmentation".into(),
            a: GModule::sign(),
            b: GModule::regular(g.clone()),
            c: GModule::trivial(g, PresentedGroup::free(1)),
            alpha: IntMatrix::from_rows(&[vec![1], vec![-1]]),
            beta: IntMatrix::from_rows(&[vec![1, 1]]),
        }
    }

    /// Equivariant maps, exact on underlying modules.
    pub fn validate(&self) -> Result<()> {
        if !equivariant(&self.a, &self.b, &self.alpha) || !equivariant(&self.b, &self.c, &self.beta) {
            return Err(Error::Precondition(format!("{}: maps are not equivariant", self.name)));
        }
        if let Some(w) = short_exact_failure(&self.a.module, &self.b.module, &self.c.module, &self.alpha, &self.beta) {
            return Err(Error::Precondition(format!("{}: not exact ({w})", self.name)));
        }
        Ok(())
    }
}

/// `Γ(u, -)` on `seq`, with the cokernel of `Γ(u, β)` as witness when
/// surjectivity fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaOutcome {
    pub contractible: Option<bool>,
    pub failure: Option<&'static str>,
    pub cokernel: String,
}

pub fn gamma_sections(s: &SiteSpec<GSetCategory>, u: &GSet, seq: &ShortExactSequence) -> Result<GammaOutcome> {
    seq.validate()?;
    let c = &s.cat;
    // exactness as sheaves is local; every object is covered by a free G-set
    for d in contractible_objects(s)?.map_err(|x| Error::OutOfBudget(format!("contractibility of {}", c.describe_obj(&x))))? {
        let (ga, gb, gc, al, be) = gamma(c, &d, seq)?;
        if let Some(w) = short_exact_failure(&ga, &gb, &gc, &al, &be) {
            return Err(Error::Precondition(format!("{} fails at {} ({w})", seq.name, c.describe_obj(&d))));
        }
    }
    let (ga, gb, gc, al, be) = gamma(c, u, seq)?;
    let failure = short_exact_failure(&ga, &gb, &gc, &al, &be);
    let coker = PresentedGroup {
        gens: gc.gens,
        relations: gc.relations.hconcat(&be),
    };
    Ok(GammaOutcome {
        contractible: is_weakly_contractible(s, u)?.is_contractible(),
        failure,
        cokernel: coker.invariants().to_string(),
    })
}

fn gamma(
    c: &GSetCategory,
    u: &GSet,
    seq: &ShortExactSequence,
) -> Result<(PresentedGroup, PresentedGroup, PresentedGroup, IntMatrix, IntMatrix)> {
    let ka = FixedPointModule { cat: c, module: &seq.a };
    let kb = FixedPointModule { cat: c, module: &seq.b };
    let kc = FixedPointModule { cat: c, module: &seq.c };
    Ok((
        ka.group(u)?,
        kb.group(u)?,
        kc.group(u)?,
        fixed_point_map(c, &seq.a, &seq.b, &seq.alpha, u)?,
        fixed_point_map(c, &seq.b, &seq.c, &seq.beta, u)?,
    ))
}

/// `gamma-exact.<seq>.<u>` passes when `Γ(u, seq)` is short exact.
pub fn gamma_exactness_check(s: &SiteSpec<GSetCategory>, u: &GSet, seq: &ShortExactSequence) -> Result<CheckReport> {
    let o = gamma_sections(s, u, seq)?;
    let mut report = CheckReport::new();
    let id = format!("gamma-exact.{}.{}", seq.name, s.cat.describe_obj(u));
    let contractible = match o.contractible {
        Some(true) => "contractible",
        Some(false) => "not contractible",
        None => "contractibility unknown",
    };
    report.push(match o.failure {
        None => Check::pass(id, contractible),
        Some(w) => Check::fail(id, format!("{contractible}; {w} exactness fails, cokernel {}", o.cokernel)),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{FiniteCoproducts, FiniteGroup};
    use crate::protop::{verify_weak_covering, Topology};
    use crate::sheaf::yoneda;
    use crate::site::{generate_k, jointly_surjective, Basis};

    fn bg2() -> SiteSpec<GSetCategory> {
        SiteSpec::new(
            GSetCategory::z2(6),
            Basis::Rule {
                name: "jointly-surjective".into(),
                max_members: Some(2),
                accepts: jointly_surjective,
            },
        )
    }

    #[test]
    fn contractible_objects_of_bg2() {
        let s = bg2();
        let c = &s.cat;
        let names: Vec<String> = contractible_objects(&s).unwrap().unwrap().iter().map(|x| c.describe_obj(x)).collect();
        let expected: Vec<String> = [c.empty(), c.free_orbit(), c.from_counts(&[0, 2]).unwrap()]
            .iter()
            .map(|x| c.describe_obj(x))
            .collect();
        assert_eq!(names, expected);
        let w = is_weakly_contractible(&s, &c.point()).unwrap();
        assert_eq!(w.is_contractible(), Some(false));
        assert_eq!(c.source(w.failure.as_ref().unwrap()), c.free_orbit());
        let w = is_weakly_contractible(&s, &c.free_orbit()).unwrap();
        assert!(verify_witness(c, &w).unwrap());
        assert!(!w.splittings.is_empty());
        // coproducts of contractibles stay contractible
        let g = c.free_orbit();
        let sum = c.coproduct(&[g.clone(), g]).unwrap().apex;
        assert_eq!(is_weakly_contractible(&s, &sum).unwrap().is_contractible(), Some(true));
    }

    #[test]
    fn p_of_the_point_is_the_free_orbit() {
        let s = bg2();
        let k = generate_k(&s).unwrap();
        let ps = ProSite::new(s, Topology::Weak, 2).unwrap();
        let c = &ps.base.cat;
        let pt = ps.pro.constant(&c.point());
        let rec = iterate_p(&ps, &pt, &k, 3).unwrap();
        assert_eq!(rec.stabilized_at, Some(1));
        assert_eq!(rec.iterations(), 2);
        assert!(pro_isomorphism(&ps.pro, &rec.result(), &ps.pro.constant(&c.free_orbit())).unwrap().is_some());
        for d in &rec.covering.steps {
            assert_eq!(verify_weak_covering(&ps, d).unwrap(), None);
        }
        let r = check_p_contractible(&ps, &rec, &k).unwrap();
        assert!(r.passes_within_budget(), "{r:?}");
        assert_eq!(is_weakly_contractible_pro(&ps, &rec.result()).unwrap().is_contractible(), Some(true));
        // K(G) = {id}: one round, no steps
        let g = ps.pro.constant(&c.free_orbit());
        let rec = build_p(&ps, &g, &k).unwrap();
        assert!(rec.rounds[0].steps.is_empty());
        assert_eq!(rec.stabilized_at, Some(0));
    }

    #[test]
    fn truncated_k_fails_with_witness() {
        let s = bg2();
        let mut k = generate_k(&s).unwrap();
        let c = s.cat.clone();
        k.sets.insert(c.point(), vec![c.identity(&c.point())]);
        let ps = ProSite::new(s, Topology::Weak, 2).unwrap();
        let rec = build_p(&ps, &ps.pro.constant(&c.point()), &k).unwrap();
        assert_eq!(rec.stabilized_at, Some(0));
        let r = check_p_contractible(&ps, &rec, &k).unwrap();
        let f = r.first_failure().expect("truncated K cannot split G -> *");
        assert!(f.details.contains("no member of K"), "{f:?}");
    }

    #[test]
    fn dc_restriction_recovers_probes() {
        let s = bg2();
        let c = &s.cat;
        let probes = vec![
            ("one".to_string(), Presheaf::constant(c, 1).unwrap()),
            ("y(G)".to_string(), yoneda(c, &c.free_orbit()).unwrap()),
            ("y(2G)".to_string(), yoneda(c, &c.from_counts(&[0, 2]).unwrap()).unwrap()),
            ("y(*)".to_string(), yoneda(c, &c.point()).unwrap()),
        ];
        let r = dc_restriction_check(&s, &probes).unwrap();
        assert!(r.passes_within_budget(), "{r:?}");
        // functions on fixed points: two sections over *, one over G
        let fixed = |x: &GSet| (0..c.size(x)).filter(|&e| c.act(x, 1, e) == e).collect::<Vec<_>>();
        let on_fixed = Presheaf::tabulate(
            c,
            |x| Ok(1 << fixed(x).len()),
            |f| {
                let (fx, fy) = (fixed(&f.src), fixed(&f.dst));
                Ok((0..1usize << fy.len())
                    .map(|m| {
                        fx.iter()
                            .enumerate()
                            .map(|(k, &p)| ((m >> fy.iter().position(|&q| q == f.images[p]).unwrap()) & 1) << k)
                            .sum()
                    })
                    .collect())
            },
        )
        .unwrap();
        assert!(on_fixed.check_functorial(c).unwrap().is_empty());
        let bad = vec![("fixed".to_string(), on_fixed)];
        let r = dc_restriction_check(&s, &bad).unwrap();
        assert!(r.first_failure().is_some());
    }

    #[test]
    fn sections_over_the_free_orbit_are_exact() {
        let s = bg2();
        let c = &s.cat;
        let g = FiniteGroup::cyclic(2);
        for seq in [ShortExactSequence::doubling(g), ShortExactSequence::augmentation()] {
            let r = gamma_exactness_check(&s, &c.free_orbit(), &seq).unwrap();
            assert!(r.passes_within_budget(), "{r:?}");
        }
        let o = gamma_sections(&s, &c.point(), &ShortExactSequence::augmentation()).unwrap();
        assert_eq!(o.failure, Some("right"));
        assert_eq!(o.cokernel, "Z/2");
        assert_eq!(o.contractible, Some(false));
        let o = gamma_sections(&s, &c.point(), &ShortExactSequence::doubling(FiniteGroup::cyclic(2))).unwrap();
        assert_eq!(o.failure, None);
        let mut broken = ShortExactSequence::augmentation();
        broken.beta = IntMatrix::from_rows(&[vec![1, 0]]);
        assert!(matches!(gamma_sections(&s, &c.point(), &broken), Err(Error::Precondition(_))));
    }
}
