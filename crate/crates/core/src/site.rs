//! Grothendieck topologies presented by bases of finite covering families.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::fincat::{find_isomorphism, Category, FiniteCoproducts, FiniteLimits, GSetCategory};
use crate::sheaf::{is_sheaf, yoneda};
use crate::verdict::{Check, CheckReport};
use crate::{Error, Result, Verdict};

/// Default saturation depth for covering-sieve decisions.
pub const DEFAULT_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoveringFamily<O, M> {
    pub target: O,
    pub members: Vec<M>,
}

/// `{m1, m2} -> U` in the category's notation.
pub fn describe_family<C: Category>(c: &C, fam: &CoveringFamily<C::Obj, C::Mor>) -> String {
    let ms: Vec<String> = fam.members.iter().map(|m| c.describe_mor(m)).collect();
    format!("{{{}}} -> {}", ms.join(", "), c.describe_obj(&fam.target))
}

/// A set of arrows into `target`, closed under precomposition within the
/// snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sieve<O, M> {
    pub target: O,
    pub arrows: BTreeSet<M>,
}

impl<O, M: Ord> Sieve<O, M> {
    pub fn contains(&self, f: &M) -> bool {
        self.arrows.contains(f)
    }

    pub fn is_subset(&self, other: &Sieve<O, M>) -> bool {
        self.arrows.is_subset(&other.arrows)
    }
}

/// Acceptance predicate of a rule-generated basis.
pub type CoverRule<C> = fn(&C, &<C as Category>::Obj, &[<C as Category>::Mor]) -> bool;

/// A basis of covering families. Isomorphisms always cover.
pub enum Basis<C: Category> {
    Explicit(Vec<CoveringFamily<C::Obj, C::Mor>>),
    /// Families of snapshot arrows with at most `max_members` members that
    /// the rule accepts, evaluated lazily per target.
    Rule {
        name: String,
        max_members: Option<usize>,
        accepts: CoverRule<C>,
    },
}

impl<C: Category> Clone for Basis<C> {
    fn clone(&self) -> Self {
        match self {
            Basis::Explicit(f) => Basis::Explicit(f.clone()),
            Basis::Rule {
                name,
                max_members,
                accepts,
            } => Basis::Rule {
                name: name.clone(),
                max_members: *max_members,
                accepts: *accepts,
            },
        }
    }
}

/// The jointly-surjective rule on finite G-sets.
pub fn jointly_surjective(c: &GSetCategory, target: &crate::fincat::GSet, fam: &[crate::fincat::GSetMap]) -> bool {
    c.jointly_surjective(target, fam)
}

type FamilyCache<C> = Mutex<HashMap<<C as Category>::Obj, Arc<Vec<CoveringFamily<<C as Category>::Obj, <C as Category>::Mor>>>>>;
type SieveMemo<C> = HashMap<(Sieve<<C as Category>::Obj, <C as Category>::Mor>, usize), bool>;

/// A category with a basis for a topology.
pub struct SiteSpec<C: Category> {
    pub cat: C,
    pub basis: Basis<C>,
    pub depth: usize,
    families: FamilyCache<C>,
    /// Covering verdicts by sieve and remaining depth; sieves are canonical.
    sieves: Mutex<SieveMemo<C>>,
    morphisms: Mutex<HashMap<C::Mor, bool>>,
}

impl<C: Category + Clone> Clone for SiteSpec<C> {
    fn clone(&self) -> Self {
        SiteSpec::new(self.cat.clone(), self.basis.clone()).with_depth(self.depth)
    }
}

impl<C: Category> SiteSpec<C> {
    pub fn new(cat: C, basis: Basis<C>) -> Self {
        SiteSpec {
            cat,
            basis,
            depth: DEFAULT_DEPTH,
            families: Mutex::new(HashMap::new()),
            sieves: Mutex::new(HashMap::new()),
            morphisms: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self.sieves.lock().unwrap().clear();
        self.morphisms.lock().unwrap().clear();
        self
    }

    /// All snapshot arrows into `target`.
    pub fn arrows_into(&self, target: &C::Obj) -> Result<Vec<C::Mor>> {
        let mut out = Vec::new();
        for x in self.cat.snapshot() {
            out.extend(self.cat.hom(&x, target)?);
        }
        Ok(out)
    }

    /// Basis families on `target` (including the singleton families of
    /// isomorphisms), in a deterministic order.
    pub fn families(&self, target: &C::Obj) -> Result<Arc<Vec<CoveringFamily<C::Obj, C::Mor>>>> {
        if let Some(f) = self.families.lock().unwrap().get(target) {
            return Ok(f.clone());
        }
        let arrows = self.arrows_into(target)?;
        let mut out: BTreeSet<CoveringFamily<C::Obj, C::Mor>> = BTreeSet::new();
        for a in &arrows {
            if self.cat.is_iso(a)? {
                out.insert(CoveringFamily {
                    target: target.clone(),
                    members: vec![a.clone()],
                });
            }
        }
        match &self.basis {
            Basis::Explicit(fams) => {
                for f in fams.iter().filter(|f| &f.target == target) {
                    out.insert(f.clone());
                }
            }
            Basis::Rule {
                max_members,
                accepts,
                ..
            } => {
                let cap = max_members.unwrap_or(arrows.len()).min(arrows.len().max(1));
                let mut idx: Vec<usize> = Vec::new();
                multisets(arrows.len(), cap, &mut idx, &mut |ix| {
                    let members: Vec<C::Mor> = ix.iter().map(|&i| arrows[i].clone()).collect();
                    if accepts(&self.cat, target, &members) {
                        out.insert(CoveringFamily {
                            target: target.clone(),
                            members,
                        });
                    }
                });
            }
        }
        let out = Arc::new(out.into_iter().collect::<Vec<_>>());
        self.families
            .lock()
            .unwrap()
            .insert(target.clone(), out.clone());
        Ok(out)
    }

    /// All basis families over all snapshot objects.
    pub fn all_families(&self) -> Result<Vec<CoveringFamily<C::Obj, C::Mor>>> {
        let mut out = Vec::new();
        for x in self.cat.snapshot() {
            out.extend(self.families(&x)?.iter().cloned());
        }
        Ok(out)
    }

    pub fn maximal_sieve(&self, target: &C::Obj) -> Result<Sieve<C::Obj, C::Mor>> {
        Ok(Sieve {
            target: target.clone(),
            arrows: self.arrows_into(target)?.into_iter().collect(),
        })
    }

    /// The smallest sieve containing the family.
    pub fn sieve_generated(&self, fam: &CoveringFamily<C::Obj, C::Mor>) -> Result<Sieve<C::Obj, C::Mor>> {
        for m in &fam.members {
            if self.cat.target(m) != fam.target {
                return Err(Error::Malformed(format!("{} does not land in the family target", self.cat.describe_mor(m))));
            }
            if !self.cat.in_snapshot(&self.cat.source(m)) {
                return Err(Error::OutOfBudget(format!("member {} starts outside the snapshot", self.cat.describe_mor(m))));
            }
        }
        let mut arrows = BTreeSet::new();
        for g in self.arrows_into(&fam.target)? {
            for m in &fam.members {
                if !self.cat.lift_along(m, &g)?.is_empty() {
                    arrows.insert(g.clone());
                    break;
                }
            }
        }
        Ok(Sieve {
            target: fam.target.clone(),
            arrows,
        })
    }

    /// `f^* S` for `f: V -> U`.
    pub fn pullback_sieve(&self, sv: &Sieve<C::Obj, C::Mor>, f: &C::Mor) -> Result<Sieve<C::Obj, C::Mor>> {
        let v = self.cat.source(f);
        let mut arrows = BTreeSet::new();
        for g in self.arrows_into(&v)? {
            if sv.contains(&self.cat.compose(f, &g)?) {
                arrows.insert(g);
            }
        }
        Ok(Sieve { target: v, arrows })
    }

    /// Whether the sieve is covering: it contains a basis family, or some
    /// basis family refines it locally (bounded by the saturation depth).
    pub fn is_covering_sieve(&self, sv: &Sieve<C::Obj, C::Mor>) -> Result<bool> {
        // the memo leaves the lock while the search runs; a nested call starts empty
        let mut memo = std::mem::take(&mut *self.sieves.lock().unwrap());
        let r = self.covers(sv, self.depth, &mut memo);
        let mut shared = self.sieves.lock().unwrap();
        if shared.len() < memo.len() {
            *shared = memo;
        }
        r
    }

    fn covers(
        &self,
        sv: &Sieve<C::Obj, C::Mor>,
        depth: usize,
        memo: &mut HashMap<(Sieve<C::Obj, C::Mor>, usize), bool>,
    ) -> Result<bool> {
        if let Some(&b) = memo.get(&(sv.clone(), depth)) {
            return Ok(b);
        }
        let fams = self.families(&sv.target)?;
        let mut result = fams
            .iter()
            .any(|f| f.members.iter().all(|m| sv.contains(m)));
        if !result && depth > 0 {
            'fam: for f in fams.iter() {
                for m in &f.members {
                    if sv.contains(m) {
                        continue;
                    }
                    let pulled = self.pullback_sieve(sv, m)?;
                    if !self.covers(&pulled, depth - 1, memo)? {
                        continue 'fam;
                    }
                }
                result = true;
                break;
            }
        }
        memo.insert((sv.clone(), depth), result);
        Ok(result)
    }

    pub fn is_covering_family(&self, fam: &CoveringFamily<C::Obj, C::Mor>) -> Result<bool> {
        let sv = self.sieve_generated(fam)?;
        self.is_covering_sieve(&sv)
    }

    pub fn is_covering_morphism(&self, f: &C::Mor) -> Result<bool> {
        if let Some(&b) = self.morphisms.lock().unwrap().get(f) {
            return Ok(b);
        }
        let b = self.is_covering_family(&CoveringFamily {
            target: self.cat.target(f),
            members: vec![f.clone()],
        })?;
        self.morphisms.lock().unwrap().insert(f.clone(), b);
        Ok(b)
    }

    /// All snapshot covering morphisms onto `target`.
    pub fn covering_morphisms_onto(&self, target: &C::Obj) -> Result<Vec<C::Mor>> {
        let mut out = Vec::new();
        for f in self.arrows_into(target)? {
            if self.is_covering_morphism(&f)? {
                out.push(f);
            }
        }
        Ok(out)
    }
}

/// Enumerate non-decreasing index sequences of length `0..=cap`.
fn multisets(n: usize, cap: usize, prefix: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    visit(prefix);
    if prefix.len() == cap {
        return;
    }
    let start = prefix.last().copied().unwrap_or(0);
    for i in start..n {
        prefix.push(i);
        multisets(n, cap, prefix, visit);
        prefix.pop();
    }
}

/// Coherence: basis families are finite and bounded, and the snapshot
/// carries the chosen finite limits the basis needs.
pub fn check_coherent<C: FiniteLimits>(s: &SiteSpec<C>) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    match &s.basis {
        Basis::Rule {
            name,
            max_members: None,
            ..
        } => rep.push(Check::fail(
            "coherent.finite-families",
            format!("rule `{name}` has no bound on family size"),
        )),
        _ => rep.push(Check::pass("coherent.finite-families", "all basis families have bounded size")),
    }
    if s.cat.snapshot().is_empty() {
        rep.push(Check::pass("coherent.finite-limits", "empty snapshot"));
        return Ok(rep);
    }
    match s.cat.terminal() {
        Ok(t) if s.cat.in_snapshot(&t) => {}
        Ok(_) => rep.push(Check::unverified("coherent.terminal", "terminal object outside snapshot")),
        Err(e) => rep.push(Check::fail("coherent.terminal", e.to_string())),
    }
    let mut missing = None;
    let (mut ok, mut outside) = (0, 0);
    'outer: for fam in s.all_families()? {
        for a in &fam.members {
            for b in &fam.members {
                match s.cat.pullback(a, b) {
                    Ok(pb) if s.cat.in_snapshot(&pb.apex) => ok += 1,
                    Ok(_) | Err(Error::OutOfBudget(_)) => outside += 1,
                    Err(e) => {
                        missing = Some(format!("{} x {}: {e}", s.cat.describe_mor(a), s.cat.describe_mor(b)));
                        break 'outer;
                    }
                }
            }
        }
    }
    rep.push_scoped("coherent.finite-limits", missing, ok, outside);
    Ok(rep)
}

/// Every representable satisfies the sheaf condition for every basis family.
pub fn check_subcanonical<C: FiniteLimits>(s: &SiteSpec<C>) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    for w in s.cat.snapshot() {
        let r = is_sheaf(s, &yoneda(&s.cat, &w)?)?;
        let failure = r.first_failure().map(|c| format!("{}: {}", c.id, c.details));
        let id = format!("subcanonical.{}", s.cat.describe_obj(&w));
        rep.push_scoped(&id, failure, r.count(Verdict::Pass), r.count(Verdict::Unverified));
    }
    Ok(rep)
}

/// Facts about one chosen coproduct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoproductFacts {
    pub disjoint: Option<bool>,
    pub pullback_stable: Option<bool>,
    pub witness: Option<String>,
}

/// Disjointness and pullback stability of a coproduct cocone, within snapshot.
pub fn coproduct_facts<C: FiniteLimits + FiniteCoproducts>(
    c: &C,
    injections: &[C::Mor],
    apex: &C::Obj,
) -> Result<CoproductFacts> {
    let initial = c.initial()?;
    let mut disjoint = Some(true);
    let mut witness = None;
    for i in 0..injections.len() {
        for j in i + 1..injections.len() {
            match c.pullback(&injections[i], &injections[j]) {
                Ok(pb) => {
                    let is_init = pb.apex == initial
                        || (c.in_snapshot(&pb.apex) && find_isomorphism(c, &pb.apex, &initial)?.is_some());
                    if !is_init {
                        disjoint = Some(false);
                        witness.get_or_insert_with(|| {
                            format!(
                                "pullback of injections {i},{j} into {} is {}, not initial",
                                c.describe_obj(apex),
                                c.describe_obj(&pb.apex)
                            )
                        });
                    }
                }
                Err(Error::OutOfBudget(_)) => {
                    if disjoint == Some(true) {
                        disjoint = None;
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut stable = Some(true);
    for v in c.snapshot() {
        for f in c.hom(&v, apex)? {
            let mut parts = Vec::new();
            let mut legs = Vec::new();
            let mut ok = true;
            for inj in injections {
                match c.pullback(&f, inj) {
                    Ok(pb) => {
                        parts.push(pb.apex.clone());
                        legs.push(pb.left);
                    }
                    Err(Error::OutOfBudget(_)) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !ok {
                stable = stable.and(None);
                continue;
            }
            let cc = match c.coproduct(&parts) {
                Ok(cc) => cc,
                Err(Error::OutOfBudget(_)) | Err(Error::Absent(_)) => {
                    stable = stable.and(None);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let comparison = if legs.is_empty() {
                c.initial_map(&v)?
            } else {
                c.copair(&cc, &legs)?
            };
            if !c.is_iso(&comparison)? {
                stable = Some(false);
                witness.get_or_insert_with(|| {
                    format!("decomposition of {} along {} is not a coproduct", c.describe_obj(&v), c.describe_mor(&f))
                });
            }
        }
    }
    Ok(CoproductFacts {
        disjoint,
        pullback_stable: stable,
        witness,
    })
}

/// Admissibility within the snapshot: subcanonical, finite coproducts with
/// covering injections, strict initial object, disjoint and pullback-stable
/// coproducts. Items that leave the snapshot are reported as unverified.
pub fn check_admissible<C: FiniteLimits + FiniteCoproducts>(s: &SiteSpec<C>) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    let sub = check_subcanonical(s)?;
    rep.push_scoped(
        "admissible.subcanonical",
        sub.first_failure().map(|c| format!("{}: {}", c.id, c.details)),
        sub.count(Verdict::Pass),
        sub.count(Verdict::Unverified),
    );
    let c = &s.cat;
    let snap = c.snapshot();
    let initial = match c.initial() {
        Ok(i) => i,
        Err(e) => {
            rep.push(Check::fail("admissible.coproducts", format!("empty coproduct missing: {e}")));
            return Ok(rep);
        }
    };

    let mut strict = None;
    for x in &snap {
        for f in c.hom(x, &initial)? {
            if !c.is_iso(&f)? && strict.is_none() {
                strict = Some(format!("{} -> initial is not an isomorphism", c.describe_obj(x)));
            }
        }
    }
    rep.push_scoped("admissible.strict-initial", strict, snap.len(), 0);

    // the empty family must cover the initial object (empty coproduct)
    let empty = CoveringFamily {
        target: initial.clone(),
        members: vec![],
    };
    let mut covers = Tally::default();
    if s.is_covering_family(&empty)? {
        covers.ok += 1;
    } else {
        covers.fail("empty coproduct: the empty family does not cover the initial object".into());
    }
    let (mut coprods, mut disjoint, mut stable) = (Tally::default(), Tally::default(), Tally::default());
    for (ai, a) in snap.iter().enumerate() {
        for b in snap.iter().skip(ai) {
            let parts = vec![a.clone(), b.clone()];
            let pair = format!("{} ⊔ {}", c.describe_obj(a), c.describe_obj(b));
            let cc = match c.coproduct(&parts) {
                Ok(cc) if c.in_snapshot(&cc.apex) => cc,
                Ok(_) | Err(Error::OutOfBudget(_)) => {
                    for t in [&mut coprods, &mut covers, &mut disjoint, &mut stable] {
                        t.outside += 1;
                    }
                    continue;
                }
                Err(e) => {
                    coprods.fail(format!("{pair}: {e}"));
                    continue;
                }
            };
            if crate::fincat::verify_coproduct(c, &parts, &cc)? {
                coprods.ok += 1;
            } else {
                coprods.fail(format!("{pair}: chosen coproduct {} not couniversal", c.describe_obj(&cc.apex)));
            }
            let fam = CoveringFamily {
                target: cc.apex.clone(),
                members: cc.injections.clone(),
            };
            if s.is_covering_family(&fam)? {
                covers.ok += 1;
            } else {
                covers.fail(format!("injections of {pair} do not cover"));
            }
            let facts = coproduct_facts(c, &cc.injections, &cc.apex)?;
            let wit = format!("{pair}: {}", facts.witness.clone().unwrap_or_default());
            disjoint.record(facts.disjoint, &wit);
            stable.record(facts.pullback_stable, &wit);
        }
    }
    coprods.push(&mut rep, "admissible.coproducts");
    covers.push(&mut rep, "admissible.injections-cover");
    disjoint.push(&mut rep, "admissible.disjoint");
    stable.push(&mut rep, "admissible.pullback-stable");
    Ok(rep)
}

#[derive(Default)]
struct Tally {
    ok: usize,
    outside: usize,
    failure: Option<String>,
}

impl Tally {
    fn fail(&mut self, w: String) {
        self.failure.get_or_insert(w);
    }

    fn record(&mut self, fact: Option<bool>, witness: &str) {
        match fact {
            Some(true) => self.ok += 1,
            Some(false) => self.fail(witness.to_string()),
            None => self.outside += 1,
        }
    }

    fn push(self, rep: &mut CheckReport, id: &str) {
        rep.push_scoped(id, self.failure, self.ok, self.outside);
    }
}

/// Pullbacks of basis families along snapshot morphisms are covering.
pub fn check_pullback_stability<C: FiniteLimits>(s: &SiteSpec<C>) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    let (mut ok, mut outside) = (0usize, 0usize);
    let mut failure = None;
    for u in s.cat.snapshot() {
        for fam in s.families(&u)?.iter() {
            for v in s.cat.snapshot() {
                for g in s.cat.hom(&v, &u)? {
                    let mut members = Vec::new();
                    let mut inside = true;
                    for m in &fam.members {
                        match s.cat.pullback(&g, m) {
                            Ok(pb) if s.cat.in_snapshot(&pb.apex) => members.push(pb.left),
                            Ok(_) | Err(Error::OutOfBudget(_)) => inside = false,
                            Err(e) => return Err(e),
                        }
                    }
                    if !inside {
                        outside += 1;
                        continue;
                    }
                    let pulled = CoveringFamily {
                        target: v.clone(),
                        members,
                    };
                    if s.is_covering_family(&pulled)? {
                        ok += 1;
                    } else if failure.is_none() {
                        failure = Some(format!("{} pulled back along {}", describe_family(&s.cat, fam), s.cat.describe_mor(&g)));
                    }
                }
            }
        }
    }
    rep.push_scoped("site.pullback-stability", failure, ok, outside);
    Ok(rep)
}

/// Refining each member of a basis family by a basis family gives a
/// covering family. Exhaustive over the first `per_member` refinements of
/// each member.
pub fn check_composition_closure<C: Category>(s: &SiteSpec<C>, per_member: usize) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    let mut count = 0;
    let mut failure = None;
    for u in s.cat.snapshot() {
        for fam in s.families(&u)?.iter() {
            let mut choices: Vec<Vec<CoveringFamily<C::Obj, C::Mor>>> = Vec::new();
            for m in &fam.members {
                let subs = s.families(&s.cat.source(m))?;
                choices.push(subs.iter().take(per_member).cloned().collect());
            }
            let mut pick = vec![0usize; choices.len()];
            if choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            loop {
                let mut members = Vec::new();
                for (k, m) in fam.members.iter().enumerate() {
                    for inner in &choices[k][pick[k]].members {
                        members.push(s.cat.compose(m, inner)?);
                    }
                }
                count += 1;
                let composite = CoveringFamily {
                    target: u.clone(),
                    members,
                };
                if !s.is_covering_family(&composite)? && failure.is_none() {
                    failure = Some(describe_family(&s.cat, &composite));
                }
                let mut i = pick.len();
                let done = loop {
                    if i == 0 {
                        break true;
                    }
                    i -= 1;
                    pick[i] += 1;
                    if pick[i] < choices[i].len() {
                        break false;
                    }
                    pick[i] = 0;
                };
                if done {
                    break;
                }
            }
        }
    }
    rep.push(match failure {
        Some(w) => Check::fail("site.composition-closure", w),
        None => Check::pass("site.composition-closure", format!("{count} composite families cover")),
    });
    Ok(rep)
}

/// Per-object finite sets of covering morphisms through which every
/// covering morphism is refined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSelection<O, M> {
    pub sets: BTreeMap<O, Vec<M>>,
}

impl<O: Ord, M> KSelection<O, M> {
    pub fn get(&self, x: &O) -> Option<&Vec<M>> {
        self.sets.get(x)
    }
}

/// Choose `K(C)` for every snapshot object: the identity first, then a
/// greedy cover of the remaining covering morphisms.
pub fn generate_k<C: Category>(s: &SiteSpec<C>) -> Result<KSelection<C::Obj, C::Mor>> {
    let mut sets = BTreeMap::new();
    for x in s.cat.snapshot() {
        let covs = s.covering_morphisms_onto(&x)?;
        let refines = |d: &C::Mor, e: &C::Mor| -> Result<bool> { Ok(!s.cat.lift_along(e, d)?.is_empty()) };
        let id = s.cat.identity(&x);
        let mut k = vec![id.clone()];
        let mut remaining = Vec::new();
        for e in &covs {
            if !refines(&id, e)? {
                remaining.push(e.clone());
            }
        }
        while !remaining.is_empty() {
            let mut best: Option<(usize, &C::Mor)> = None;
            for d in &covs {
                let mut n = 0;
                for e in &remaining {
                    if refines(d, e)? {
                        n += 1;
                    }
                }
                if n > 0 && best.is_none_or(|(bn, _)| n > bn) {
                    best = Some((n, d));
                }
            }
            let (_, d) = best.expect("each covering morphism refines itself");
            let d = d.clone();
            let mut rest = Vec::new();
            for e in remaining {
                if !refines(&d, &e)? {
                    rest.push(e);
                }
            }
            remaining = rest;
            k.push(d);
        }
        sets.insert(x, k);
    }
    Ok(KSelection { sets })
}

/// Exhaustively verify the factorization property of a K-selection.
pub fn verify_k<C: Category>(s: &SiteSpec<C>, k: &KSelection<C::Obj, C::Mor>) -> Result<CheckReport> {
    let mut rep = CheckReport::new();
    for x in s.cat.snapshot() {
        let name = s.cat.describe_obj(&x);
        let Some(ks) = k.get(&x) else {
            rep.push(Check::fail(format!("smallness.{name}"), "no K-set"));
            continue;
        };
        let mut bad = None;
        for d in ks {
            if !s.is_covering_morphism(d)? {
                bad = Some(format!("{} is not a covering morphism", s.cat.describe_mor(d)));
            }
        }
        for e in s.covering_morphisms_onto(&x)? {
            let mut found = false;
            for d in ks {
                if !s.cat.lift_along(&e, d)?.is_empty() {
                    found = true;
                    break;
                }
            }
            if !found && bad.is_none() {
                bad = Some(format!("{} refined by no member of K", s.cat.describe_mor(&e)));
            }
        }
        rep.push(match bad {
            Some(w) => Check::fail(format!("smallness.{name}"), w),
            None => Check::pass(format!("smallness.{name}"), format!("|K| = {}", ks.len())),
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{GSet, GSetMap, TableCategory};

    fn bg(budget: usize) -> SiteSpec<GSetCategory> {
        SiteSpec::new(
            GSetCategory::z2(budget),
            Basis::Rule {
                name: "jointly-surjective".into(),
                max_members: Some(2),
                accepts: jointly_surjective,
            },
        )
    }

    fn b2_with(extra: Vec<CoveringFamily<String, String>>) -> SiteSpec<TableCategory> {
        let names = ["∅", "{1}", "{2}", "{1,2}"];
        let masks = [0u8, 1, 2, 3];
        let c = TableCategory::poset(&names, |i, j| masks[i] & !masks[j] == 0).unwrap();
        let mut fams = vec![
            CoveringFamily {
                target: "{1,2}".to_string(),
                members: vec!["{1}<={1,2}".to_string(), "{2}<={1,2}".to_string()],
            },
            CoveringFamily {
                target: "∅".to_string(),
                members: vec![],
            },
        ];
        fams.extend(extra);
        SiteSpec::new(c, Basis::Explicit(fams))
    }

    fn g_to_pt(c: &GSetCategory) -> GSetMap {
        c.to_terminal(&c.free_orbit()).unwrap()
    }

    fn single(c: &GSetCategory, f: &GSetMap) -> CoveringFamily<GSet, GSetMap> {
        CoveringFamily {
            target: c.target(f),
            members: vec![f.clone()],
        }
    }

    #[test]
    fn generated_sieves() {
        let s = bg(6);
        let c = &s.cat;
        let pt = c.point();
        let id = single(c, &c.identity(&pt));
        assert_eq!(s.sieve_generated(&id).unwrap(), s.maximal_sieve(&pt).unwrap());
        let sv = s.sieve_generated(&single(c, &g_to_pt(c))).unwrap();
        let sources: BTreeSet<GSet> = sv.arrows.iter().map(|f| f.src.clone()).collect();
        let two_g = c.from_counts(&[0, 2]).unwrap();
        assert_eq!(sources, [c.empty(), c.free_orbit(), two_g].into_iter().collect());
        let empty = CoveringFamily {
            target: c.empty(),
            members: vec![],
        };
        assert!(s.sieve_generated(&empty).unwrap().arrows.is_empty());
    }

    #[test]
    fn covering_decisions() {
        let s = bg(6);
        let c = &s.cat;
        let pt = c.point();
        assert!(s.is_covering_sieve(&s.maximal_sieve(&pt).unwrap()).unwrap());
        let e = c.initial_map(&pt).unwrap();
        assert!(!s.is_covering_morphism(&e).unwrap());
        assert!(s.is_covering_morphism(&g_to_pt(c)).unwrap());
        assert!(s.is_covering_morphism(&c.identity(&c.free_orbit())).unwrap());
    }

    #[test]
    fn saturation_is_monotone_on_subsieves() {
        let s = bg(4);
        let c = &s.cat;
        let pt = c.point();
        let big = s.maximal_sieve(&pt).unwrap();
        let small = s.sieve_generated(&single(c, &g_to_pt(c))).unwrap();
        assert!(small.is_subset(&big));
        assert!(s.is_covering_sieve(&small).unwrap());
    }

    #[test]
    fn coherence() {
        assert!(check_coherent(&bg(6)).unwrap().passes_within_budget());
        let unbounded = SiteSpec::new(
            GSetCategory::z2(3),
            Basis::Rule {
                name: "jointly-surjective".into(),
                max_members: None,
                accepts: jointly_surjective,
            },
        );
        let r = check_coherent(&unbounded).unwrap();
        assert_eq!(r.first_failure().unwrap().id, "coherent.finite-families");
        let only_empty = SiteSpec::new(TableCategory::poset(&["∅"], |_, _| true).unwrap(), Basis::Explicit(vec![]));
        assert_eq!(check_coherent(&only_empty).unwrap().verdict(), Verdict::Pass);
    }

    #[test]
    fn subcanonicity() {
        assert!(check_subcanonical(&bg(6)).unwrap().passes_within_budget());
        assert_eq!(check_subcanonical(&b2_with(vec![])).unwrap().verdict(), Verdict::Pass);
        let bad = b2_with(vec![CoveringFamily {
            target: "{1}".to_string(),
            members: vec![],
        }]);
        assert_eq!(check_subcanonical(&bad).unwrap().verdict(), Verdict::Fail);
    }

    #[test]
    fn admissibility() {
        let r = check_admissible(&bg(6)).unwrap();
        assert!(r.passes_within_budget(), "{r:#?}");
        let r = check_admissible(&b2_with(vec![])).unwrap();
        let failed: Vec<&str> = r.failures().map(|c| c.id.as_str()).collect();
        assert_eq!(failed, vec!["admissible.disjoint"]);
        let w = &r.first_failure().unwrap().details;
        assert!(w.contains("{1} ⊔ {1}"), "{w}");
        let point = TableCategory::poset(&["X"], |_, _| true).unwrap();
        let r = check_admissible(&SiteSpec::new(point, Basis::Explicit(vec![]))).unwrap();
        assert_eq!(r.first_failure().unwrap().id, "admissible.injections-cover");
    }

    #[test]
    fn stability_and_closure() {
        let s = bg(4);
        assert!(check_pullback_stability(&s).unwrap().passes_within_budget());
        assert_eq!(check_composition_closure(&s, 3).unwrap().verdict(), Verdict::Pass);
        let b = b2_with(vec![]);
        assert!(check_pullback_stability(&b).unwrap().passes_within_budget());
    }

    #[test]
    fn k_sets() {
        let s = bg(6);
        let c = &s.cat;
        let k = generate_k(&s).unwrap();
        assert_eq!(k.get(&c.free_orbit()).unwrap(), &vec![c.identity(&c.free_orbit())]);
        assert_eq!(k.get(&c.empty()).unwrap(), &vec![c.identity(&c.empty())]);
        let kp = k.get(&c.point()).unwrap();
        assert!(kp.contains(&c.identity(&c.point())));
        assert!(kp.contains(&g_to_pt(c)));
        assert_eq!(verify_k(&s, &k).unwrap().verdict(), Verdict::Pass);
    }
}
