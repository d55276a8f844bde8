//! Set-valued presheaves on a snapshot, the sheaf condition, sheafification
//! and transport along functors.
//!
//! Sections over an object are the integers `0..n`. A restriction table for
//! `f: X -> Y` maps sections over `Y` to sections over `X`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::fincat::{Category, FiniteLimits, Functor, PullbackCone};
use crate::site::{CoveringFamily, Sieve, SiteSpec};
use crate::verdict::CheckReport;
use crate::{Error, Result};

/// Product sizes beyond this are reported as out of budget.
pub const ENUMERATION_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Presheaf<O: Ord, M: Ord> {
    pub sections: BTreeMap<O, usize>,
    pub restrict: BTreeMap<M, Vec<usize>>,
}

/// All morphisms between snapshot objects.
pub fn snapshot_morphisms<C: Category>(c: &C) -> Result<Vec<C::Mor>> {
    let snap = c.snapshot();
    let mut out = Vec::new();
    for a in &snap {
        for b in &snap {
            out.extend(c.hom(a, b)?);
        }
    }
    Ok(out)
}

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> Presheaf<O, M> {
    pub fn card(&self, x: &O) -> Result<usize> {
        self.sections
            .get(x)
            .copied()
            .ok_or_else(|| Error::OutOfBudget(format!("presheaf undefined on {x:?}")))
    }

    /// `F(f)(s)`.
    pub fn res(&self, f: &M, s: usize) -> Result<usize> {
        let t = self
            .restrict
            .get(f)
            .ok_or_else(|| Error::OutOfBudget(format!("presheaf undefined on {f:?}")))?;
        t.get(s)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("section {s} out of range for {f:?}")))
    }

    pub fn total_sections(&self) -> usize {
        self.sections.values().sum()
    }
}

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> Presheaf<O, M> {
    /// Tabulate over the snapshot of `c`.
    pub fn tabulate<C: Category<Obj = O, Mor = M>>(
        c: &C,
        sections: impl Fn(&O) -> Result<usize>,
        restrict: impl Fn(&M) -> Result<Vec<usize>>,
    ) -> Result<Self> {
        let mut secs = BTreeMap::new();
        for x in c.snapshot() {
            let n = sections(&x)?;
            secs.insert(x, n);
        }
        let mut res = BTreeMap::new();
        for f in snapshot_morphisms(c)? {
            let t = restrict(&f)?;
            res.insert(f, t);
        }
        Ok(Presheaf {
            sections: secs,
            restrict: res,
        })
    }

    /// `n` sections everywhere, identity restrictions.
    pub fn constant<C: Category<Obj = O, Mor = M>>(c: &C, n: usize) -> Result<Self> {
        Self::tabulate(c, |_| Ok(n), |_| Ok((0..n).collect()))
    }

    /// Identity and composition laws over the snapshot.
    pub fn check_functorial<C: Category<Obj = O, Mor = M>>(&self, c: &C) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for x in c.snapshot() {
            let n = self.card(&x)?;
            if self.restrict.get(&c.identity(&x)).map(|t| t.as_slice()) != Some(&(0..n).collect::<Vec<_>>()[..]) {
                bad.push(format!("identity of {} does not restrict to identity", c.describe_obj(&x)));
            }
        }
        let morphisms: Vec<M> = self.restrict.keys().cloned().collect();
        for f in &morphisms {
            if self.restrict[f].len() != self.card(&c.target(f))?
                || self.restrict[f].iter().any(|&s| s >= self.sections[&c.source(f)])
            {
                bad.push(format!("restriction along {} has wrong shape", c.describe_mor(f)));
                continue;
            }
            for g in &morphisms {
                if c.target(f) != c.source(g) {
                    continue;
                }
                let gf = c.compose(g, f)?;
                for s in 0..self.card(&c.target(g))? {
                    if self.res(&gf, s)? != self.res(f, self.res(g, s)?)? {
                        bad.push(format!(
                            "restriction along {} ∘ {} is not the composite",
                            c.describe_mor(g),
                            c.describe_mor(f)
                        ));
                        break;
                    }
                }
            }
        }
        Ok(bad)
    }
}

/// `Hom(-, w)` with sections over `x` indexed by `c.hom(x, w)` order.
pub fn yoneda<C: Category>(c: &C, w: &C::Obj) -> Result<Presheaf<C::Obj, C::Mor>> {
    let mut homs: HashMap<C::Obj, Vec<C::Mor>> = HashMap::new();
    for x in c.snapshot() {
        homs.insert(x.clone(), c.hom(&x, w)?);
    }
    let index: HashMap<C::Mor, usize> = homs
        .values()
        .flat_map(|v| v.iter().enumerate().map(|(i, f)| (f.clone(), i)))
        .collect();
    Presheaf::tabulate(
        c,
        |x| Ok(homs[x].len()),
        |f| {
            homs[&c.target(f)]
                .iter()
                .map(|g| Ok(index[&c.compose(g, f)?]))
                .collect()
        },
    )
}

/// The section of `yoneda(c, w)` over `source(f)` corresponding to `f`.
pub fn yoneda_index<C: Category>(c: &C, w: &C::Obj, f: &C::Mor) -> Result<usize> {
    c.hom(&c.source(f), w)?
        .iter()
        .position(|g| g == f)
        .ok_or_else(|| Error::Malformed(format!("{f:?} does not land in {w:?}")))
}

/// A compatible choice of sections over the members of a covering family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingFamily<O, M> {
    pub family: CoveringFamily<O, M>,
    pub data: Vec<usize>,
}

/// Pairwise member pullbacks, or `None` when one leaves the snapshot.
#[allow(clippy::type_complexity)]
fn member_pullbacks<C: FiniteLimits>(
    c: &C,
    fam: &CoveringFamily<C::Obj, C::Mor>,
) -> Result<Option<Vec<(usize, usize, PullbackCone<C::Obj, C::Mor>)>>> {
    let mut out = Vec::new();
    for i in 0..fam.members.len() {
        for j in i..fam.members.len() {
            match c.pullback(&fam.members[i], &fam.members[j]) {
                Ok(pb) if c.in_snapshot(&pb.apex) => out.push((i, j, pb)),
                Ok(_) | Err(Error::OutOfBudget(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Some(out))
}

/// All matching families of `F` on `fam`, or `None` when a pairwise
/// pullback leaves the snapshot.
pub fn matching_families<C: FiniteLimits>(
    c: &C,
    f: &Presheaf<C::Obj, C::Mor>,
    fam: &CoveringFamily<C::Obj, C::Mor>,
) -> Result<Option<Vec<MatchingFamily<C::Obj, C::Mor>>>> {
    let Some(pbs) = member_pullbacks(c, fam)? else {
        return Ok(None);
    };
    let sizes: Vec<usize> = fam
        .members
        .iter()
        .map(|m| f.card(&c.source(m)))
        .collect::<Result<_>>()?;
    if sizes.iter().try_fold(1usize, |a, &b| a.checked_mul(b.max(1))).is_none_or(|p| p > ENUMERATION_BUDGET) {
        return Err(Error::OutOfBudget("matching-family enumeration too large".into()));
    }
    let mut out = Vec::new();
    let mut partial = Vec::new();
    fn go<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug>(
        f: &Presheaf<O, M>,
        sizes: &[usize],
        pbs: &[(usize, usize, PullbackCone<O, M>)],
        partial: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let k = partial.len();
        if k == sizes.len() {
            out.push(partial.clone());
            return Ok(());
        }
        for s in 0..sizes[k] {
            partial.push(s);
            let mut ok = true;
            for (i, j, pb) in pbs.iter().filter(|(_, j, _)| *j == k) {
                if f.res(&pb.left, partial[*i])? != f.res(&pb.right, partial[*j])? {
                    ok = false;
                    break;
                }
            }
            if ok {
                go(f, sizes, pbs, partial, out)?;
            }
            partial.pop();
        }
        Ok(())
    }
    let mut raw = Vec::new();
    go(f, &sizes, &pbs, &mut partial, &mut raw)?;
    for data in raw {
        out.push(MatchingFamily {
            family: fam.clone(),
            data,
        });
    }
    Ok(Some(out))
}

/// The sheaf condition on every basis family, one check per target object.
pub fn is_sheaf<C: FiniteLimits>(s: &SiteSpec<C>, f: &Presheaf<C::Obj, C::Mor>) -> Result<CheckReport> {
    let c = &s.cat;
    let mut rep = CheckReport::new();
    for u in c.snapshot() {
        let id = format!("sheaf.{}", c.describe_obj(&u));
        let mut failure = None;
        let mut outside = 0;
        let fams = s.families(&u)?;
        for fam in fams.iter() {
            let Some(matching) = matching_families(c, f, fam)? else {
                outside += 1;
                continue;
            };
            let mut seen = BTreeSet::new();
            for sec in 0..f.card(&u)? {
                let tuple: Vec<usize> = fam
                    .members
                    .iter()
                    .map(|m| f.res(m, sec))
                    .collect::<Result<_>>()?;
                seen.insert(tuple);
            }
            let n = f.card(&u)?;
            if seen.len() != n || matching.len() != n {
                failure = Some(format!(
                    "family {:?}: {} sections, {} distinct restrictions, {} matching families",
                    fam.members.iter().map(|m| c.describe_mor(m)).collect::<Vec<_>>(),
                    n,
                    seen.len(),
                    matching.len()
                ));
                break;
            }
        }
        rep.push_scoped(&id, failure, fams.len() - outside, outside);
    }
    Ok(rep)
}

/// A natural transformation between presheaves on the same snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PresheafMap<O: Ord, M: Ord> {
    pub src: Arc<Presheaf<O, M>>,
    pub dst: Arc<Presheaf<O, M>>,
    pub components: BTreeMap<O, Vec<usize>>,
}

impl<O: Ord + Clone + std::fmt::Debug, M: Ord + Clone + std::fmt::Debug> PresheafMap<O, M> {
    pub fn apply(&self, x: &O, s: usize) -> Result<usize> {
        self.components
            .get(x)
            .and_then(|c| c.get(s))
            .copied()
            .ok_or_else(|| Error::OutOfBudget(format!("component at {x:?} undefined")))
    }

    pub fn identity(f: &Arc<Presheaf<O, M>>) -> Self {
        PresheafMap {
            src: f.clone(),
            dst: f.clone(),
            components: f.sections.iter().map(|(x, &n)| (x.clone(), (0..n).collect())).collect(),
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMap<O, M>) -> Result<Self> {
        if first.dst != self.src {
            return Err(Error::Malformed("presheaf maps not composable".into()));
        }
        let mut components = BTreeMap::new();
        for (x, v) in &first.components {
            components.insert(x.clone(), v.iter().map(|&s| self.apply(x, s)).collect::<Result<_>>()?);
        }
        Ok(PresheafMap {
            src: first.src.clone(),
            dst: self.dst.clone(),
            components,
        })
    }

    /// Naturality squares along every tabulated morphism.
    pub fn is_natural<C: Category<Obj = O, Mor = M>>(&self, c: &C) -> Result<bool> {
        for f in self.src.restrict.keys() {
            let (x, y) = (c.source(f), c.target(f));
            for t in 0..self.src.card(&y)? {
                if self.apply(&x, self.src.res(f, t)?)? != self.dst.res(f, self.apply(&y, t)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn is_objectwise_bijective(&self) -> bool {
        self.components.iter().all(|(x, v)| {
            let mut seen = BTreeSet::new();
            v.iter().all(|s| seen.insert(*s)) && v.len() == self.dst.sections[x]
        })
    }
}

/// `y(f): y(a) -> y(b)` for `f: a -> b`.
pub fn yoneda_map<C: Category>(c: &C, f: &C::Mor) -> Result<PresheafMap<C::Obj, C::Mor>> {
    let (a, b) = (c.source(f), c.target(f));
    let ya = Arc::new(yoneda(c, &a)?);
    let yb = Arc::new(yoneda(c, &b)?);
    let mut components = BTreeMap::new();
    for x in c.snapshot() {
        let comp = c
            .hom(&x, &a)?
            .iter()
            .map(|g| yoneda_index(c, &b, &c.compose(f, g)?))
            .collect::<Result<_>>()?;
        components.insert(x, comp);
    }
    Ok(PresheafMap {
        src: ya,
        dst: yb,
        components,
    })
}

/// The presheaf map `y(w) -> F` classifying the section `s` over `w`.
pub fn yoneda_classify<C: Category>(
    c: &C,
    f: &Arc<Presheaf<C::Obj, C::Mor>>,
    w: &C::Obj,
    s: usize,
) -> Result<PresheafMap<C::Obj, C::Mor>> {
    let yw = Arc::new(yoneda(c, w)?);
    let mut components = BTreeMap::new();
    for x in c.snapshot() {
        let comp = c.hom(&x, w)?.iter().map(|g| f.res(g, s)).collect::<Result<_>>()?;
        components.insert(x, comp);
    }
    Ok(PresheafMap {
        src: yw,
        dst: f.clone(),
        components,
    })
}

/// Output of [`sheafify`].
#[derive(Debug, Clone)]
pub struct Sheafification<O: Ord, M: Ord> {
    pub sheaf: Arc<Presheaf<O, M>>,
    pub unit: PresheafMap<O, M>,
}

/// A matching family on a sieve: a section over the source of every arrow.
type SieveFamily<M> = BTreeMap<M, usize>;

fn agreement<C: Category>(a: &SieveFamily<C::Mor>, b: &SieveFamily<C::Mor>, target: &C::Obj) -> Sieve<C::Obj, C::Mor> {
    Sieve {
        target: target.clone(),
        arrows: a
            .iter()
            .filter(|(g, v)| b.get(*g) == Some(*v))
            .map(|(g, _)| g.clone())
            .collect(),
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Classes of a union-find, numbered by least member.
pub(crate) fn classes(uf: &mut UnionFind) -> (Vec<usize>, Vec<usize>) {
    let n = uf.0.len();
    let mut class_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    let mut root_class = HashMap::new();
    for i in 0..n {
        let r = uf.find(i);
        let k = *root_class.entry(r).or_insert_with(|| {
            reps.push(i);
            reps.len() - 1
        });
        class_of[i] = k;
    }
    (class_of, reps)
}

/// One plus-construction step with its unit.
fn plus<C: Category>(s: &SiteSpec<C>, f: &Arc<Presheaf<C::Obj, C::Mor>>) -> Result<Sheafification<C::Obj, C::Mor>> {
    let c = &s.cat;
    let mut reps: BTreeMap<C::Obj, Vec<SieveFamily<C::Mor>>> = BTreeMap::new();
    let mut unit = BTreeMap::new();
    for u in c.snapshot() {
        let mut elements: Vec<SieveFamily<C::Mor>> = Vec::new();
        for fam in s.families(&u)?.iter() {
            let sieve = s.sieve_generated(fam)?;
            // every sieve arrow with its factorizations through the members
            let mut factor: Vec<(C::Mor, Vec<(usize, C::Mor)>)> = Vec::new();
            for g in &sieve.arrows {
                let mut fs = Vec::new();
                for (i, m) in fam.members.iter().enumerate() {
                    for h in c.lift_along(m, g)? {
                        fs.push((i, h));
                    }
                }
                factor.push((g.clone(), fs));
            }
            let sizes: Vec<usize> = fam
                .members
                .iter()
                .map(|m| f.card(&c.source(m)))
                .collect::<Result<_>>()?;
            if sizes.iter().try_fold(1usize, |a, &b| a.checked_mul(b.max(1))).is_none_or(|p| p > ENUMERATION_BUDGET) {
                return Err(Error::OutOfBudget("plus-construction enumeration too large".into()));
            }
            let mut tuple = vec![0usize; sizes.len()];
            'tuples: loop {
                if sizes.iter().all(|&n| n > 0) || sizes.is_empty() {
                    let mut fam_data = BTreeMap::new();
                    let mut consistent = true;
                    'arrows: for (g, fs) in &factor {
                        let mut val = None;
                        for (i, h) in fs {
                            let v = f.res(h, tuple[*i])?;
                            if val.is_some_and(|w| w != v) {
                                consistent = false;
                                break 'arrows;
                            }
                            val = Some(v);
                        }
                        fam_data.insert(g.clone(), val.expect("sieve arrow factors"));
                    }
                    if consistent {
                        elements.push(fam_data);
                    }
                } else {
                    break 'tuples;
                }
                let mut k = sizes.len();
                loop {
                    if k == 0 {
                        break 'tuples;
                    }
                    k -= 1;
                    tuple[k] += 1;
                    if tuple[k] < sizes[k] {
                        break;
                    }
                    tuple[k] = 0;
                }
            }
        }
        elements.sort();
        elements.dedup();
        let mut uf = UnionFind::new(elements.len());
        for i in 0..elements.len() {
            for j in i + 1..elements.len() {
                if uf.find(i) == uf.find(j) {
                    continue;
                }
                if s.is_covering_sieve(&agreement::<C>(&elements[i], &elements[j], &u))? {
                    uf.union(i, j);
                }
            }
        }
        let (class_of, rep_idx) = classes(&mut uf);
        let mut comp = vec![0; f.card(&u)?];
        for sec in 0..f.card(&u)? {
            let mut data = BTreeMap::new();
            for g in s.arrows_into(&u)? {
                data.insert(g.clone(), f.res(&g, sec)?);
            }
            let pos = elements
                .binary_search(&data)
                .map_err(|_| Error::ConstructionFailed {
                    step: 0,
                    reason: format!("unit section {sec} over {} missing", c.describe_obj(&u)),
                })?;
            comp[sec] = class_of[pos];
        }
        unit.insert(u.clone(), comp);
        reps.insert(u, rep_idx.iter().map(|&i| elements[i].clone()).collect());
    }
    let mut restrict = BTreeMap::new();
    for fm in snapshot_morphisms(c)? {
        let (v, u) = (c.source(&fm), c.target(&fm));
        let mut table = Vec::new();
        for e in &reps[&u] {
            let mut pulled = BTreeMap::new();
            for g in s.arrows_into(&v)? {
                if let Some(&x) = e.get(&c.compose(&fm, &g)?) {
                    pulled.insert(g, x);
                }
            }
            let mut found = None;
            for (k, r) in reps[&v].iter().enumerate() {
                if s.is_covering_sieve(&agreement::<C>(&pulled, r, &v))? {
                    found = Some(k);
                    break;
                }
            }
            table.push(found.ok_or_else(|| Error::ConstructionFailed {
                step: 1,
                reason: format!("restriction along {} leaves the enumerated covers", c.describe_mor(&fm)),
            })?);
        }
        restrict.insert(fm, table);
    }
    let sheaf = Arc::new(Presheaf {
        sections: reps.iter().map(|(x, r)| (x.clone(), r.len())).collect(),
        restrict,
    });
    Ok(Sheafification {
        unit: PresheafMap {
            src: f.clone(),
            dst: sheaf.clone(),
            components: unit,
        },
        sheaf,
    })
}

/// The plus-construction applied twice, with the composite unit.
pub fn sheafify<C: Category>(s: &SiteSpec<C>, f: &Presheaf<C::Obj, C::Mor>) -> Result<Sheafification<C::Obj, C::Mor>> {
    let f = Arc::new(f.clone());
    let once = plus(s, &f)?;
    let twice = plus(s, &once.sheaf)?;
    Ok(Sheafification {
        unit: twice.unit.after(&once.unit)?,
        sheaf: twice.sheaf,
    })
}

/// Local surjectivity: every section of the target is locally in the image.
pub fn is_epi_sheaf<C: Category>(s: &SiteSpec<C>, f: &PresheafMap<C::Obj, C::Mor>) -> Result<bool> {
    let c = &s.cat;
    let mut image: HashMap<C::Obj, BTreeSet<usize>> = HashMap::new();
    for (x, v) in &f.components {
        image.insert(x.clone(), v.iter().copied().collect());
    }
    for u in c.snapshot() {
        let arrows = s.arrows_into(&u)?;
        for t in 0..f.dst.card(&u)? {
            let mut sieve = BTreeSet::new();
            for g in &arrows {
                let x = c.source(g);
                if image[&x].contains(&f.dst.res(g, t)?) {
                    sieve.insert(g.clone());
                }
            }
            if !s.is_covering_sieve(&Sieve {
                target: u.clone(),
                arrows: sieve,
            })? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every map from `f` into one of `targets` factors uniquely through the
/// unit. Returns the number of maps checked.
pub fn verify_unit_universal<C: Category>(
    c: &C,
    unit: &PresheafMap<C::Obj, C::Mor>,
    targets: &[Arc<Presheaf<C::Obj, C::Mor>>],
) -> Result<std::result::Result<usize, String>> {
    let pc = PresheafCategory::new(c, vec![])?;
    let mut checked = 0;
    for t in targets {
        let into_sheaf = pc.maps(&unit.dst, t)?;
        let composites: Vec<_> = into_sheaf.iter().map(|h| h.after(unit)).collect::<Result<_>>()?;
        for g in pc.maps(&unit.src, t)? {
            checked += 1;
            let n = composites.iter().filter(|k| **k == g).count();
            if n != 1 {
                return Ok(Err(format!("a map factors through the unit {n} times")));
            }
        }
    }
    Ok(Ok(checked))
}

/// `u_* F = F ∘ u`.
pub fn pushforward<C: Category, D: Category>(
    src: &C,
    f: &Presheaf<D::Obj, D::Mor>,
    u: &Functor<C, D>,
) -> Result<Presheaf<C::Obj, C::Mor>> {
    Presheaf::tabulate(
        src,
        |x| f.card(&u.obj(x)?),
        |m| f.restrict.get(&u.mor(m)?).cloned().ok_or_else(|| Error::OutOfBudget(format!("{m:?} maps outside snapshot"))),
    )
}

/// The presheaf left Kan extension along `u`: over `y`, the colimit of `G`
/// over pairs `(x, b: y -> u x)`.
pub fn left_kan<C: Category, D: Category>(
    src: &C,
    dst: &D,
    g: &Presheaf<C::Obj, C::Mor>,
    u: &Functor<C, D>,
) -> Result<Presheaf<D::Obj, D::Mor>> {
    let mut elems: HashMap<D::Obj, Vec<(D::Mor, C::Obj, usize)>> = HashMap::new();
    let mut class_maps: HashMap<D::Obj, (Vec<usize>, HashMap<(D::Mor, usize), usize>)> = HashMap::new();
    let c_morphisms = snapshot_morphisms(src)?;
    let mut total = 0usize;
    for y in dst.snapshot() {
        let mut list = Vec::new();
        for x in src.snapshot() {
            for b in dst.hom(&y, &u.obj(&x)?)? {
                for s in 0..g.card(&x)? {
                    list.push((b.clone(), x.clone(), s));
                }
            }
        }
        total += list.len();
        if total > ENUMERATION_BUDGET {
            return Err(Error::OutOfBudget("comma category exceeds budget".into()));
        }
        let pos: HashMap<(D::Mor, usize), usize> =
            list.iter().enumerate().map(|(i, (b, _, s))| ((b.clone(), *s), i)).collect();
        let mut uf = UnionFind::new(list.len());
        for h in &c_morphisms {
            // h: x -> x'; (b', G(h) s') ~ (u(h) ∘ b', s') with b': y -> u x
            let (x, x2) = (src.source(h), src.target(h));
            let uh = u.mor(h)?;
            for b in dst.hom(&y, &u.obj(&x)?)? {
                let ub = dst.compose(&uh, &b)?;
                for s2 in 0..g.card(&x2)? {
                    let a = pos[&(b.clone(), g.res(h, s2)?)];
                    let z = pos[&(ub.clone(), s2)];
                    uf.union(a, z);
                }
            }
        }
        let (class_of, _) = classes(&mut uf);
        class_maps.insert(y.clone(), (class_of, pos));
        elems.insert(y, list);
    }
    Presheaf::tabulate(
        dst,
        |y| Ok(class_maps[y].0.iter().copied().max().map_or(0, |m| m + 1)),
        |k| {
            // k: y' -> y; (b, s) over y restricts to (b ∘ k, s) over y'
            let (y2, y) = (dst.source(k), dst.target(k));
            let (cls, _) = &class_maps[&y];
            let (cls2, pos2) = &class_maps[&y2];
            let n = cls.iter().copied().max().map_or(0, |m| m + 1);
            let mut table = vec![usize::MAX; n];
            for (i, (b, _, s)) in elems[&y].iter().enumerate() {
                let j = pos2[&(dst.compose(b, k)?, *s)];
                table[cls[i]] = cls2[j];
            }
            Ok(table)
        },
    )
}

/// Pullback of sheaves along `u`: the presheaf Kan extension, then
/// sheafification on the target site.
pub fn transport_pullback<C: Category, D: Category>(
    src: &C,
    dst: &SiteSpec<D>,
    g: &Presheaf<C::Obj, C::Mor>,
    u: &Functor<C, D>,
) -> Result<Sheafification<D::Obj, D::Mor>> {
    let lan = left_kan(src, &dst.cat, g, u)?;
    sheafify(dst, &lan)
}

/// Presheaves on a fixed snapshot as a category. The snapshot is the list of
/// presheaves supplied at construction; hom-sets are enumerated by
/// constraint propagation.
#[derive(Debug, Clone)]
pub struct PresheafCategory<O: Ord, M: Ord> {
    objects: Vec<O>,
    /// `(f, source, target)` for every base morphism.
    morphisms: Vec<(M, O, O)>,
    snapshot: Vec<Arc<Presheaf<O, M>>>,
    budget: usize,
}

impl<O, M> PresheafCategory<O, M>
where
    O: Ord + Clone + std::hash::Hash + std::fmt::Debug,
    M: Ord + Clone + std::hash::Hash + std::fmt::Debug,
{
    pub fn new<C: Category<Obj = O, Mor = M>>(c: &C, snapshot: Vec<Arc<Presheaf<O, M>>>) -> Result<Self> {
        let objects = c.snapshot();
        let ms = snapshot_morphisms(c)?;
        Ok(PresheafCategory {
            morphisms: ms.into_iter().map(|f| (f.clone(), c.source(&f), c.target(&f))).collect(),
            objects,
            snapshot,
            budget: 100_000,
        })
    }

    pub fn objects(&self) -> &[O] {
        &self.objects
    }

    /// All natural transformations `a -> b`.
    pub fn maps(&self, a: &Arc<Presheaf<O, M>>, b: &Arc<Presheaf<O, M>>) -> Result<Vec<PresheafMap<O, M>>> {
        // variables: (object, section) of a; values: sections of b
        let mut vars: Vec<(O, usize)> = Vec::new();
        let mut var_index: HashMap<(O, usize), usize> = HashMap::new();
        // objects with most sections first tends to force the rest
        let mut order: Vec<&O> = self.objects.iter().collect();
        order.sort_by_key(|x| std::cmp::Reverse(a.sections.get(*x).copied().unwrap_or(0)));
        for x in order {
            for s in 0..a.card(x)? {
                var_index.insert((x.clone(), s), vars.len());
                vars.push((x.clone(), s));
            }
        }
        // forced[v] lists (w, f) with w = F(f) v and value(w) = G(f)(value(v))
        let mut forced: Vec<Vec<(usize, M)>> = vec![Vec::new(); vars.len()];
        let mut backward: Vec<Vec<(usize, M)>> = vec![Vec::new(); vars.len()];
        for (f, x, y) in &self.morphisms {
            for t in 0..a.card(y)? {
                let v = var_index[&(y.clone(), t)];
                let w = var_index[&(x.clone(), a.res(f, t)?)];
                forced[v].push((w, f.clone()));
                backward[w].push((v, f.clone()));
            }
        }
        let mut out = Vec::new();
        let mut assign: Vec<Option<usize>> = vec![None; vars.len()];
        self.search(a, b, &vars, &forced, &backward, &mut assign, 0, &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        a: &Arc<Presheaf<O, M>>,
        b: &Arc<Presheaf<O, M>>,
        vars: &[(O, usize)],
        forced: &[Vec<(usize, M)>],
        backward: &[Vec<(usize, M)>],
        assign: &mut Vec<Option<usize>>,
        next: usize,
        out: &mut Vec<PresheafMap<O, M>>,
    ) -> Result<()> {
        let Some(k) = (next..vars.len()).find(|&k| assign[k].is_none()) else {
            let mut components: BTreeMap<O, Vec<usize>> =
                self.objects.iter().map(|x| (x.clone(), Vec::new())).collect();
            for (i, (x, _)) in vars.iter().enumerate() {
                components.get_mut(x).unwrap().push(assign[i].unwrap());
            }
            out.push(PresheafMap {
                src: a.clone(),
                dst: b.clone(),
                components,
            });
            if out.len() > self.budget {
                return Err(Error::OutOfBudget("too many presheaf maps".into()));
            }
            return Ok(());
        };
        for val in 0..b.card(&vars[k].0)? {
            let saved = assign.clone();
            if self.propagate(b, forced, backward, assign, k, val)? {
                self.search(a, b, vars, forced, backward, assign, k + 1, out)?;
            }
            *assign = saved;
        }
        Ok(())
    }

    fn propagate(
        &self,
        b: &Presheaf<O, M>,
        forced: &[Vec<(usize, M)>],
        backward: &[Vec<(usize, M)>],
        assign: &mut [Option<usize>],
        k: usize,
        val: usize,
    ) -> Result<bool> {
        let mut stack = vec![(k, val)];
        while let Some((v, x)) = stack.pop() {
            match assign[v] {
                Some(y) if y == x => continue,
                Some(_) => return Ok(false),
                None => assign[v] = Some(x),
            }
            for (w, f) in &forced[v] {
                stack.push((*w, b.res(f, x)?));
            }
            for (u, f) in &backward[v] {
                if let Some(y) = assign[*u] {
                    if b.res(f, y)? != x {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

impl<O, M> Category for PresheafCategory<O, M>
where
    O: Ord + Clone + std::hash::Hash + std::fmt::Debug,
    M: Ord + Clone + std::hash::Hash + std::fmt::Debug,
{
    type Obj = Arc<Presheaf<O, M>>;
    type Mor = PresheafMap<O, M>;

    fn source(&self, f: &Self::Mor) -> Self::Obj {
        f.src.clone()
    }

    fn target(&self, f: &Self::Mor) -> Self::Obj {
        f.dst.clone()
    }

    fn identity(&self, x: &Self::Obj) -> Self::Mor {
        PresheafMap::identity(x)
    }

    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor> {
        g.after(f)
    }

    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Vec<Self::Mor>> {
        self.maps(a, b)
    }

    fn snapshot(&self) -> Vec<Self::Obj> {
        self.snapshot.clone()
    }

    fn describe_obj(&self, x: &Self::Obj) -> String {
        let counts: Vec<String> = x.sections.values().map(|n| n.to_string()).collect();
        format!("F[{}]", counts.join(","))
    }
}

impl<O, M> FiniteLimits for PresheafCategory<O, M>
where
    O: Ord + Clone + std::hash::Hash + std::fmt::Debug,
    M: Ord + Clone + std::hash::Hash + std::fmt::Debug,
{
    fn terminal(&self) -> Result<Self::Obj> {
        Ok(Arc::new(Presheaf {
            sections: self.objects.iter().map(|x| (x.clone(), 1)).collect(),
            restrict: self.morphisms.iter().map(|(f, _, _)| (f.clone(), vec![0])).collect(),
        }))
    }

    fn to_terminal(&self, x: &Self::Obj) -> Result<Self::Mor> {
        Ok(PresheafMap {
            src: x.clone(),
            dst: self.terminal()?,
            components: x.sections.iter().map(|(o, &n)| (o.clone(), vec![0; n])).collect(),
        })
    }

    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Result<PullbackCone<Self::Obj, Self::Mor>> {
        if f.dst != g.dst {
            return Err(Error::Malformed("presheaf maps do not form a cospan".into()));
        }
        let mut pairs: BTreeMap<O, Vec<(usize, usize)>> = BTreeMap::new();
        for x in &self.objects {
            let mut v = Vec::new();
            for s in 0..f.src.card(x)? {
                for t in 0..g.src.card(x)? {
                    if f.apply(x, s)? == g.apply(x, t)? {
                        v.push((s, t));
                    }
                }
            }
            pairs.insert(x.clone(), v);
        }
        let index: BTreeMap<(O, (usize, usize)), usize> = pairs
            .iter()
            .flat_map(|(x, v)| v.iter().enumerate().map(move |(i, p)| ((x.clone(), *p), i)))
            .collect();
        let mut restrict = BTreeMap::new();
        for (m, x, y) in &self.morphisms {
            let table = pairs[y]
                .iter()
                .map(|&(s, t)| Ok(index[&(x.clone(), (f.src.res(m, s)?, g.src.res(m, t)?))]))
                .collect::<Result<_>>()?;
            restrict.insert(m.clone(), table);
        }
        let apex = Arc::new(Presheaf {
            sections: pairs.iter().map(|(x, v)| (x.clone(), v.len())).collect(),
            restrict,
        });
        let leg = |second: bool, to: &Arc<Presheaf<O, M>>| PresheafMap {
            src: apex.clone(),
            dst: to.clone(),
            components: pairs
                .iter()
                .map(|(x, v)| (x.clone(), v.iter().map(|&(s, t)| if second { t } else { s }).collect()))
                .collect(),
        };
        Ok(PullbackCone {
            left: leg(false, &f.src),
            right: leg(true, &g.src),
            apex,
        })
    }

    fn pullback_mediate(
        &self,
        cone: &PullbackCone<Self::Obj, Self::Mor>,
        a: &Self::Mor,
        b: &Self::Mor,
    ) -> Result<Self::Mor> {
        let mut components = BTreeMap::new();
        for x in &self.objects {
            let lookup: HashMap<(usize, usize), usize> = (0..cone.apex.card(x)?)
                .map(|e| Ok(((cone.left.apply(x, e)?, cone.right.apply(x, e)?), e)))
                .collect::<Result<_>>()?;
            let comp = (0..a.src.card(x)?)
                .map(|s| {
                    lookup
                        .get(&(a.apply(x, s)?, b.apply(x, s)?))
                        .copied()
                        .ok_or_else(|| Error::Absent("maps do not form a cone".into()))
                })
                .collect::<Result<_>>()?;
            components.insert(x.clone(), comp);
        }
        Ok(PresheafMap {
            src: a.src.clone(),
            dst: cone.apex.clone(),
            components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{GSetCategory, TableCategory};
    use crate::site::{jointly_surjective, Basis};
    use crate::Verdict;

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

    fn b2() -> SiteSpec<TableCategory> {
        let names = ["∅", "{1}", "{2}", "{1,2}"];
        let masks = [0u8, 1, 2, 3];
        let c = TableCategory::poset(&names, |i, j| masks[i] & !masks[j] == 0).unwrap();
        let fam = |t: &str, ms: &[&str]| CoveringFamily {
            target: t.to_string(),
            members: ms.iter().map(|m| m.to_string()).collect(),
        };
        SiteSpec::new(
            c,
            Basis::Explicit(vec![fam("{1,2}", &["{1}<={1,2}", "{2}<={1,2}"]), fam("∅", &[])]),
        )
    }

    #[test]
    fn yoneda_of_free_orbit() {
        let s = bg(6);
        let c = &s.cat;
        let y = yoneda(c, &c.free_orbit()).unwrap();
        assert_eq!(y.card(&c.point()).unwrap(), 0);
        assert_eq!(y.card(&c.free_orbit()).unwrap(), 2);
        assert!(y.check_functorial(c).unwrap().is_empty());
        let t = yoneda(c, &c.point()).unwrap();
        assert!(t.sections.values().all(|&n| n == 1));
    }

    #[test]
    fn representables_are_sheaves() {
        let s = bg(6);
        for w in s.cat.snapshot() {
            let y = yoneda(&s.cat, &w).unwrap();
            let r = is_sheaf(&s, &y).unwrap();
            assert_ne!(r.verdict(), Verdict::Fail, "{w:?}");
            assert!(r.passes_within_budget(), "{w:?}");
        }
    }

    #[test]
    fn two_sections_over_the_union_is_not_a_sheaf() {
        let s = b2();
        let c = &s.cat;
        let f = Presheaf::tabulate(
            c,
            |x| Ok(if x == "{1,2}" { 2 } else { 1 }),
            |m| Ok(vec![0; if c.target(m) == "{1,2}" { 2 } else { 1 }]),
        )
        .unwrap();
        // identity restriction on the union must be the identity
        let mut f = f;
        f.restrict.insert("id_{1,2}".into(), vec![0, 1]);
        assert!(f.check_functorial(c).unwrap().is_empty());
        let rep = is_sheaf(&s, &f).unwrap();
        assert_eq!(rep.verdict(), Verdict::Fail);
        let sh = sheafify(&s, &f).unwrap();
        assert_eq!(sh.sheaf.card(&"{1,2}".to_string()).unwrap(), 1);
        assert_eq!(is_sheaf(&s, &sh.sheaf).unwrap().verdict(), Verdict::Pass);
    }

    #[test]
    fn sheafification_of_empty_presheaf_fills_the_empty_object() {
        let s = b2();
        let f = Presheaf::constant(&s.cat, 0).unwrap();
        let sh = sheafify(&s, &f).unwrap();
        assert_eq!(sh.sheaf.card(&"∅".to_string()).unwrap(), 1);
        assert_eq!(sh.sheaf.card(&"{1}".to_string()).unwrap(), 0);
    }

    #[test]
    fn sheafify_is_identity_on_sheaves() {
        let s = bg(4);
        let y = yoneda(&s.cat, &s.cat.free_orbit()).unwrap();
        let sh = sheafify(&s, &y).unwrap();
        assert!(sh.unit.is_objectwise_bijective());
        assert!(sh.unit.is_natural(&s.cat).unwrap());
    }

    #[test]
    fn epi_tests() {
        let s = bg(6);
        let c = &s.cat;
        let g_to_pt = c.to_terminal(&c.free_orbit()).unwrap();
        assert!(is_epi_sheaf(&s, &yoneda_map(c, &g_to_pt).unwrap()).unwrap());
        let e_to_pt = c.to_terminal(&c.empty()).unwrap();
        assert!(!is_epi_sheaf(&s, &yoneda_map(c, &e_to_pt).unwrap()).unwrap());
        let id = PresheafMap::identity(&Arc::new(yoneda(c, &c.point()).unwrap()));
        assert!(is_epi_sheaf(&s, &id).unwrap());
    }

    #[test]
    fn yoneda_is_fully_faithful_on_snapshot() {
        let s = bg(4);
        let c = &s.cat;
        let pc = PresheafCategory::new(c, vec![]).unwrap();
        for a in c.snapshot() {
            for b in c.snapshot() {
                let ya = Arc::new(yoneda(c, &a).unwrap());
                let yb = Arc::new(yoneda(c, &b).unwrap());
                assert_eq!(pc.maps(&ya, &yb).unwrap().len(), c.hom(&a, &b).unwrap().len());
            }
        }
    }

    #[test]
    fn left_kan_along_inclusion_preserves_representables() {
        let small = GSetCategory::z2(3);
        let big = bg(6);
        let u: Functor<GSetCategory, GSetCategory> =
            Functor::tabulate(&small, |x| Ok(x.clone()), |f| Ok(f.clone())).unwrap();
        let w = small.free_orbit();
        let y = yoneda(&small, &w).unwrap();
        let t = transport_pullback(&small, &big, &y, &u).unwrap();
        let expect = yoneda(&big.cat, &w).unwrap();
        assert_eq!(t.sheaf.sections, expect.sections);
        let back = pushforward(&small, &expect, &u).unwrap();
        assert_eq!(back, y);
    }

    #[test]
    fn unit_is_universal() {
        let s = b2();
        let c = &s.cat;
        let mut f = Presheaf::tabulate(
            c,
            |x| Ok(if x == "{1,2}" { 2 } else { 1 }),
            |m| Ok(vec![0; if c.target(m) == "{1,2}" { 2 } else { 1 }]),
        )
        .unwrap();
        f.restrict.insert("id_{1,2}".into(), vec![0, 1]);
        let sh = sheafify(&s, &f).unwrap();
        let targets: Vec<_> = c
            .snapshot()
            .iter()
            .map(|w| Arc::new(yoneda(c, w).unwrap()))
            .chain([sh.sheaf.clone()])
            .collect();
        let n = verify_unit_universal(c, &sh.unit, &targets).unwrap().unwrap();
        assert!(n > 0);
    }

    #[test]
    fn presheaf_pullbacks_are_objectwise() {
        let s = bg(4);
        let c = &s.cat;
        let f = yoneda_map(c, &c.to_terminal(&c.free_orbit()).unwrap()).unwrap();
        let pc = PresheafCategory::new(c, vec![]).unwrap();
        let pb = pc.pullback(&f, &f).unwrap();
        // y(G) ×_{y(*)} y(G) = y(G × G) = y(2G)
        let y2g = yoneda(c, &c.from_counts(&[0, 2]).unwrap()).unwrap();
        assert_eq!(pb.apex.sections, y2g.sections);
        let m = pc.pullback_mediate(&pb, &pb.left, &pb.right).unwrap();
        assert_eq!(m, PresheafMap::identity(&pb.apex));
    }
}
