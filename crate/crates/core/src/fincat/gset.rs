//! Finite G-sets for a small finite group, generated on demand.
//!
//! Objects are kept in a canonical form: a multiplicity for each conjugacy
//! class of subgroups `H` (orbit type `G/H`). Type 0 is always `G/G` (a fixed
//! point, written `*`) and the last type is `G/1` (the free orbit, `G`).
//! Chosen limits and coproducts are computed concretely and then transported
//! to canonical form along an explicit isomorphism.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{Category, Cocone, FiniteCoproducts, FiniteLimits, PullbackCone, WideCone};
use crate::{Error, Result};

/// A finite group given by its multiplication table; element 0 is the unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(name: &str, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::Malformed("group table must be square over 0..n".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if table[0][a] != a || row[0] != a {
                return Err(Error::Malformed("element 0 is not the unit".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Malformed(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == 0)
                .ok_or_else(|| Error::Malformed(format!("{a} has no inverse")))?;
        }
        Ok(FiniteGroup {
            name: name.to_string(),
            table,
            inverse,
        })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(&format!("Z/{n}"), table).expect("cyclic table is a group")
    }

    pub fn trivial() -> Self {
        FiniteGroup::cyclic(1)
    }

    /// The symmetric group on three letters, elements as permutations in
    /// lexicographic order.
    pub fn s3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| idx([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        FiniteGroup::from_table("S3", table).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    fn subgroups(&self) -> Vec<BTreeSet<usize>> {
        let n = self.order();
        assert!(n <= 16, "subgroup enumeration is exhaustive");
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask & 1 == 0 {
                continue;
            }
            let s: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if s.iter().all(|&a| s.iter().all(|&b| s.contains(&self.mul(a, b)))) {
                out.push(s);
            }
        }
        out
    }

    fn conjugate(&self, g: usize, h: &BTreeSet<usize>) -> BTreeSet<usize> {
        h.iter().map(|&x| self.mul(self.mul(g, x), self.inv(g))).collect()
    }
}

/// One transitive G-set `G/H` laid out as cosets.
#[derive(Debug, Clone, PartialEq, Eq)]
struct OrbitType {
    subgroup: BTreeSet<usize>,
    /// `act[g][k]` = index of `g·(coset k)`.
    act: Vec<Vec<usize>>,
    /// A representative group element of each coset.
    coset_reps: Vec<usize>,
}

/// Canonical finite G-set: multiplicity of each orbit type.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GSet {
    counts: Vec<usize>,
}

impl GSet {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn orbit_count(&self) -> usize {
        self.counts.iter().sum()
    }
}

impl fmt::Debug for GSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSet{:?}", self.counts)
    }
}

/// An equivariant map, stored as the image of each element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GSetMap {
    pub src: GSet,
    pub dst: GSet,
    pub images: Vec<usize>,
}

/// A non-canonical finite G-set: `act[g][x]`.
#[derive(Debug, Clone)]
struct Concrete {
    size: usize,
    act: Vec<Vec<usize>>,
}

/// The category of finite G-sets with a snapshot of the first `budget`
/// objects in the order (orbit count, then multiplicity vector descending).
#[derive(Debug, Clone)]
pub struct GSetCategory {
    group: FiniteGroup,
    types: Vec<OrbitType>,
    budget: usize,
    hom_budget: usize,
    snapshot: Vec<GSet>,
}

impl PartialEq for GSetCategory {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.budget == other.budget
    }
}

impl GSetCategory {
    pub fn new(group: FiniteGroup, budget: usize) -> Self {
        let subgroups = group.subgroups();
        let mut classes: Vec<BTreeSet<usize>> = Vec::new();
        for h in &subgroups {
            let conj = group.elements().any(|g| {
                let c = group.conjugate(g, h);
                classes.contains(&c)
            });
            if !conj {
                classes.push(h.clone());
            }
        }
        classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let types = classes
            .into_iter()
            .map(|h| {
                let mut cosets: Vec<BTreeSet<usize>> = Vec::new();
                let mut coset_reps = Vec::new();
                for g in group.elements() {
                    let c: BTreeSet<usize> = h.iter().map(|&x| group.mul(g, x)).collect();
                    if !cosets.contains(&c) {
                        cosets.push(c);
                        coset_reps.push(g);
                    }
                }
                let act = group
                    .elements()
                    .map(|g| {
                        coset_reps
                            .iter()
                            .map(|&r| {
                                let gr = group.mul(g, r);
                                cosets.iter().position(|c| c.contains(&gr)).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                OrbitType {
                    subgroup: h,
                    act,
                    coset_reps,
                }
            })
            .collect::<Vec<_>>();
        let mut cat = GSetCategory {
            group,
            types,
            budget,
            hom_budget: 250_000,
            snapshot: vec![],
        };
        cat.snapshot = cat.enumerate(budget);
        cat
    }

    /// Finite Z/2-sets, the standard fixture.
    pub fn z2(budget: usize) -> Self {
        GSetCategory::new(FiniteGroup::cyclic(2), budget)
    }

    pub fn with_hom_budget(mut self, hom_budget: usize) -> Self {
        self.hom_budget = hom_budget;
        self
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    /// The first `n` objects in enumeration order. Deterministic, and the
    /// result for `n` is a prefix of the result for any `n' > n`.
    pub fn enumerate(&self, n: usize) -> Vec<GSet> {
        let t = self.types.len();
        let mut out = Vec::new();
        let mut orbits = 0;
        while out.len() < n {
            let mut level = Vec::new();
            compositions(orbits, t, &mut vec![], &mut level);
            level.sort_by(|a, b| b.cmp(a));
            for counts in level {
                if out.len() == n {
                    break;
                }
                out.push(GSet { counts });
            }
            orbits += 1;
        }
        out
    }

    pub fn empty(&self) -> GSet {
        GSet {
            counts: vec![0; self.types.len()],
        }
    }

    pub fn point(&self) -> GSet {
        self.orbit(0)
    }

    /// The free orbit `G`.
    pub fn free_orbit(&self) -> GSet {
        self.orbit(self.types.len() - 1)
    }

    /// A single orbit of the given type.
    pub fn orbit(&self, ty: usize) -> GSet {
        let mut counts = vec![0; self.types.len()];
        counts[ty] = 1;
        GSet { counts }
    }

    pub fn from_counts(&self, counts: &[usize]) -> Result<GSet> {
        if counts.len() != self.types.len() {
            return Err(Error::Malformed(format!(
                "expected {} orbit multiplicities",
                self.types.len()
            )));
        }
        Ok(GSet {
            counts: counts.to_vec(),
        })
    }

    /// Parse names like `∅`, `*`, `G`, `2*`, `*+G`, `G+*`, `3G`.
    pub fn parse_object(&self, s: &str) -> Result<GSet> {
        let s = s.trim();
        let mut counts = vec![0; self.types.len()];
        if s == "∅" || s == "0" || s.is_empty() {
            return Ok(GSet { counts });
        }
        for term in s.split(['+', '⊔']) {
            let term = term.trim();
            let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
            let mult = if digits.is_empty() { 1 } else { digits.parse().unwrap() };
            let name = &term[digits.len()..];
            let ty = (0..self.types.len())
                .find(|&t| self.type_name(t) == name)
                .ok_or_else(|| Error::Malformed(format!("unknown orbit type `{name}`")))?;
            counts[ty] += mult;
        }
        Ok(GSet { counts })
    }

    fn type_name(&self, t: usize) -> String {
        if t == 0 {
            "*".into()
        } else if t + 1 == self.types.len() {
            "G".into()
        } else {
            format!("G/H{t}")
        }
    }

    pub fn size(&self, x: &GSet) -> usize {
        x.counts
            .iter()
            .zip(&self.types)
            .map(|(c, t)| c * t.coset_reps.len())
            .sum()
    }

    /// `(type, local coset index)` for each element, in layout order.
    fn layout(&self, x: &GSet) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut base = 0;
        for (t, &c) in x.counts.iter().enumerate() {
            let len = self.types[t].coset_reps.len();
            for _ in 0..c {
                for k in 0..len {
                    out.push((t, k, base));
                }
                base += len;
            }
        }
        out
    }

    /// `g · x` for an element of a canonical G-set.
    pub fn act(&self, x: &GSet, g: usize, e: usize) -> usize {
        let (t, k, base) = self.layout(x)[e];
        base + self.types[t].act[g][k]
    }

    fn concrete(&self, x: &GSet) -> Concrete {
        let lay = self.layout(x);
        let act = self
            .group
            .elements()
            .map(|g| lay.iter().map(|&(t, k, base)| base + self.types[t].act[g][k]).collect())
            .collect();
        Concrete {
            size: lay.len(),
            act,
        }
    }

    /// Canonical form of a concrete G-set with `iso[e]` = concrete element
    /// corresponding to canonical element `e`.
    fn canonicalize(&self, c: &Concrete) -> (GSet, Vec<usize>) {
        let mut seen = vec![false; c.size];
        let mut orbits: Vec<(usize, Vec<usize>)> = Vec::new();
        for x in 0..c.size {
            if seen[x] {
                continue;
            }
            let stab: BTreeSet<usize> = self.group.elements().filter(|&g| c.act[g][x] == x).collect();
            let mut found = None;
            'types: for (t, ty) in self.types.iter().enumerate() {
                if ty.subgroup.len() != stab.len() {
                    continue;
                }
                for g in self.group.elements() {
                    if self.group.conjugate(g, &stab) == ty.subgroup {
                        found = Some((t, g));
                        break 'types;
                    }
                }
            }
            let (t, g1) = found.expect("every stabilizer is conjugate to a listed subgroup");
            let y = c.act[g1][x];
            let elems: Vec<usize> = self.types[t]
                .coset_reps
                .iter()
                .map(|&r| c.act[r][y])
                .collect();
            for &e in &elems {
                seen[e] = true;
            }
            orbits.push((t, elems));
        }
        orbits.sort_by_key(|(t, _)| *t);
        let mut counts = vec![0; self.types.len()];
        let mut iso = Vec::with_capacity(c.size);
        for (t, elems) in orbits {
            counts[t] += 1;
            iso.extend(elems);
        }
        (GSet { counts }, iso)
    }

    fn check_map(&self, f: &GSetMap) -> bool {
        if f.images.len() != self.size(&f.src) || f.images.iter().any(|&y| y >= self.size(&f.dst)) {
            return false;
        }
        let (s, d) = (self.concrete(&f.src), self.concrete(&f.dst));
        self.group.elements().all(|g| {
            (0..f.images.len()).all(|x| f.images[s.act[g][x]] == d.act[g][f.images[x]])
        })
    }

    /// Build a map from its element images, checking equivariance.
    pub fn map(&self, src: &GSet, dst: &GSet, images: Vec<usize>) -> Result<GSetMap> {
        let f = GSetMap {
            src: src.clone(),
            dst: dst.clone(),
            images,
        };
        if self.check_map(&f) {
            Ok(f)
        } else {
            Err(Error::Malformed(format!("{f:?} is not an equivariant map")))
        }
    }

    pub fn is_surjective(&self, f: &GSetMap) -> bool {
        let mut hit = vec![false; self.size(&f.dst)];
        for &y in &f.images {
            hit[y] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// Whether the images of a family jointly cover the target.
    pub fn jointly_surjective(&self, target: &GSet, family: &[GSetMap]) -> bool {
        let mut hit = vec![false; self.size(target)];
        for f in family {
            for &y in &f.images {
                hit[y] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    fn tuples_limit(&self, maps: &[GSetMap]) -> Result<(GSet, Vec<usize>, Vec<Vec<usize>>)> {
        let base = maps[0].dst.clone();
        if maps.iter().any(|m| m.dst != base) {
            return Err(Error::Malformed("wide pullback legs have different targets".into()));
        }
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for m in maps {
            let mut next = Vec::new();
            for t in &tuples {
                for (x, &y) in m.images.iter().enumerate() {
                    if t.is_empty() || maps[0].images[t[0]] == y {
                        let mut u = t.clone();
                        u.push(x);
                        next.push(u);
                    }
                }
            }
            tuples = next;
            if tuples.len() > self.hom_budget {
                return Err(Error::OutOfBudget(format!(
                    "wide pullback has more than {} elements",
                    self.hom_budget
                )));
            }
        }
        let index: HashMap<Vec<usize>, usize> =
            tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let srcs: Vec<Concrete> = maps.iter().map(|m| self.concrete(&m.src)).collect();
        let act = self
            .group
            .elements()
            .map(|g| {
                tuples
                    .iter()
                    .map(|t| {
                        let u: Vec<usize> = t
                            .iter()
                            .zip(&srcs)
                            .map(|(&x, c)| c.act[g][x])
                            .collect();
                        index[&u]
                    })
                    .collect()
            })
            .collect();
        let (apex, iso) = self.canonicalize(&Concrete {
            size: tuples.len(),
            act,
        });
        Ok((apex, iso, tuples))
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == parts {
        let mut v = prefix.clone();
        v.push(total);
        out.push(v);
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts, prefix, out);
        prefix.pop();
    }
}

impl Category for GSetCategory {
    type Obj = GSet;
    type Mor = GSetMap;

    fn source(&self, f: &GSetMap) -> GSet {
        f.src.clone()
    }

    fn target(&self, f: &GSetMap) -> GSet {
        f.dst.clone()
    }

    fn identity(&self, x: &GSet) -> GSetMap {
        GSetMap {
            src: x.clone(),
            dst: x.clone(),
            images: (0..self.size(x)).collect(),
        }
    }

    fn compose(&self, g: &GSetMap, f: &GSetMap) -> Result<GSetMap> {
        if f.dst != g.src {
            return Err(Error::Malformed(format!("{g:?} ∘ {f:?} not composable")));
        }
        Ok(GSetMap {
            src: f.src.clone(),
            dst: g.dst.clone(),
            images: f.images.iter().map(|&y| g.images[y]).collect(),
        })
    }

    fn hom(&self, a: &GSet, b: &GSet) -> Result<Vec<GSetMap>> {
        let lay = self.layout(a);
        let nb = self.size(b);
        // orbit starts of the source
        let mut reps = Vec::new();
        let mut e = 0;
        while e < lay.len() {
            let (t, _, _) = lay[e];
            reps.push((t, e));
            e += self.types[t].coset_reps.len();
        }
        let bc = self.concrete(b);
        let mut candidates = Vec::new();
        let mut total: usize = 1;
        for &(t, _) in &reps {
            let h = &self.types[t].subgroup;
            let c: Vec<usize> = (0..nb)
                .filter(|&y| h.iter().all(|&g| bc.act[g][y] == y))
                .collect();
            total = total.saturating_mul(c.len());
            candidates.push(c);
        }
        if total > self.hom_budget {
            return Err(Error::OutOfBudget(format!(
                "|Hom({}, {})| = {total} exceeds hom budget {}",
                self.describe_obj(a),
                self.describe_obj(b),
                self.hom_budget
            )));
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; reps.len()];
        if candidates.iter().any(|c| c.is_empty()) {
            return Ok(out);
        }
        loop {
            let mut images = vec![0; lay.len()];
            for (o, &(t, start)) in reps.iter().enumerate() {
                let y = candidates[o][choice[o]];
                for (k, &r) in self.types[t].coset_reps.iter().enumerate() {
                    images[start + k] = bc.act[r][y];
                }
            }
            out.push(GSetMap {
                src: a.clone(),
                dst: b.clone(),
                images,
            });
            let mut i = reps.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < candidates[i].len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn snapshot(&self) -> Vec<GSet> {
        self.snapshot.clone()
    }

    fn in_snapshot(&self, x: &GSet) -> bool {
        self.snapshot.contains(x)
    }

    fn factor_through(&self, t: &GSetMap, g: &GSetMap) -> Result<Vec<GSetMap>> {
        if t.src != g.src {
            return Err(Error::Malformed("factor_through: different sources".into()));
        }
        if !self.is_surjective(t) {
            let mut out = Vec::new();
            for h in self.hom(&t.dst, &g.dst)? {
                if self.compose(&h, t)? == *g {
                    out.push(h);
                }
            }
            return Ok(out);
        }
        let mut images = vec![usize::MAX; self.size(&t.dst)];
        for (x, &y) in t.images.iter().enumerate() {
            if images[y] == usize::MAX {
                images[y] = g.images[x];
            } else if images[y] != g.images[x] {
                return Ok(vec![]);
            }
        }
        Ok(vec![GSetMap {
            src: t.dst.clone(),
            dst: g.dst.clone(),
            images,
        }])
    }

    fn describe_obj(&self, x: &GSet) -> String {
        let terms: Vec<String> = x
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, &c)| {
                if c == 1 {
                    self.type_name(t)
                } else {
                    format!("{c}{}", self.type_name(t))
                }
            })
            .collect();
        if terms.is_empty() {
            "∅".into()
        } else {
            terms.join("+")
        }
    }

    fn describe_mor(&self, f: &GSetMap) -> String {
        format!(
            "{}->{}{:?}",
            self.describe_obj(&f.src),
            self.describe_obj(&f.dst),
            f.images
        )
    }
}

impl FiniteLimits for GSetCategory {
    fn terminal(&self) -> Result<GSet> {
        Ok(self.point())
    }

    fn to_terminal(&self, x: &GSet) -> Result<GSetMap> {
        Ok(GSetMap {
            src: x.clone(),
            dst: self.point(),
            images: vec![0; self.size(x)],
        })
    }

    fn pullback(&self, f: &GSetMap, g: &GSetMap) -> Result<PullbackCone<GSet, GSetMap>> {
        let w = self.wide_pullback(&[f.clone(), g.clone()])?;
        let mut legs = w.legs.into_iter();
        Ok(PullbackCone {
            apex: w.apex,
            left: legs.next().unwrap(),
            right: legs.next().unwrap(),
        })
    }

    fn pullback_mediate(
        &self,
        cone: &PullbackCone<GSet, GSetMap>,
        a: &GSetMap,
        b: &GSetMap,
    ) -> Result<GSetMap> {
        let w = WideCone {
            apex: cone.apex.clone(),
            legs: vec![cone.left.clone(), cone.right.clone()],
        };
        self.mediate_by_tuples(&w, &[a.clone(), b.clone()])
    }

    fn wide_pullback(&self, maps: &[GSetMap]) -> Result<WideCone<GSet, GSetMap>> {
        if maps.is_empty() {
            return Err(Error::Malformed("empty wide pullback".into()));
        }
        let (apex, iso, tuples) = self.tuples_limit(maps)?;
        let legs = maps
            .iter()
            .enumerate()
            .map(|(k, m)| GSetMap {
                src: apex.clone(),
                dst: m.src.clone(),
                images: iso.iter().map(|&c| tuples[c][k]).collect(),
            })
            .collect();
        Ok(WideCone { apex, legs })
    }

    fn wide_mediate(
        &self,
        _maps: &[GSetMap],
        cone: &WideCone<GSet, GSetMap>,
        components: &[GSetMap],
    ) -> Result<GSetMap> {
        self.mediate_by_tuples(cone, components)
    }
}

impl GSetCategory {
    fn mediate_by_tuples(
        &self,
        cone: &WideCone<GSet, GSetMap>,
        components: &[GSetMap],
    ) -> Result<GSetMap> {
        if components.len() != cone.legs.len() || components.is_empty() {
            return Err(Error::Malformed("mediate arity mismatch".into()));
        }
        let index: HashMap<Vec<usize>, usize> = (0..self.size(&cone.apex))
            .map(|e| (cone.legs.iter().map(|l| l.images[e]).collect(), e))
            .collect();
        let x = components[0].src.clone();
        let images = (0..self.size(&x))
            .map(|e| {
                let t: Vec<usize> = components.iter().map(|c| c.images[e]).collect();
                index
                    .get(&t)
                    .copied()
                    .ok_or_else(|| Error::Absent("components do not form a cone".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GSetMap {
            src: x,
            dst: cone.apex.clone(),
            images,
        })
    }
}

impl FiniteCoproducts for GSetCategory {
    fn initial(&self) -> Result<GSet> {
        Ok(self.empty())
    }

    fn initial_map(&self, x: &GSet) -> Result<GSetMap> {
        Ok(GSetMap {
            src: self.empty(),
            dst: x.clone(),
            images: vec![],
        })
    }

    fn coproduct(&self, parts: &[GSet]) -> Result<Cocone<GSet, GSetMap>> {
        let mut offsets = Vec::new();
        let mut size = 0;
        for p in parts {
            offsets.push(size);
            size += self.size(p);
        }
        let concretes: Vec<Concrete> = parts.iter().map(|p| self.concrete(p)).collect();
        let act = self
            .group
            .elements()
            .map(|g| {
                concretes
                    .iter()
                    .zip(&offsets)
                    .flat_map(|(c, &o)| c.act[g].iter().map(move |&x| x + o))
                    .collect()
            })
            .collect();
        let (apex, iso) = self.canonicalize(&Concrete { size, act });
        let mut inverse = vec![0; size];
        for (e, &c) in iso.iter().enumerate() {
            inverse[c] = e;
        }
        let injections = parts
            .iter()
            .zip(&offsets)
            .map(|(p, &o)| GSetMap {
                src: p.clone(),
                dst: apex.clone(),
                images: (0..self.size(p)).map(|x| inverse[o + x]).collect(),
            })
            .collect();
        Ok(Cocone { apex, injections })
    }

    fn copair(&self, cocone: &Cocone<GSet, GSetMap>, maps: &[GSetMap]) -> Result<GSetMap> {
        let dst = maps
            .first()
            .map(|m| m.dst.clone())
            .ok_or_else(|| Error::Malformed("copair of empty family needs a target".into()))?;
        let mut images = vec![usize::MAX; self.size(&cocone.apex)];
        for (inj, m) in cocone.injections.iter().zip(maps) {
            for (x, &e) in inj.images.iter().enumerate() {
                images[e] = m.images[x];
            }
        }
        Ok(GSetMap {
            src: cocone.apex.clone(),
            dst,
            images,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{check_category_laws, verify_limit, Cone, Diagram};

    #[test]
    fn z2_snapshot_order() {
        let c = GSetCategory::z2(6);
        let names: Vec<String> = c.snapshot().iter().map(|x| c.describe_obj(x)).collect();
        assert_eq!(names, ["∅", "*", "G", "2*", "*+G", "2G"]);
    }

    #[test]
    fn enumeration_is_monotone() {
        let c = GSetCategory::new(FiniteGroup::s3(), 4);
        let a = c.enumerate(5);
        let b = c.enumerate(11);
        assert_eq!(&b[..5], &a[..]);
        assert_eq!(c.type_count(), 4);
    }

    #[test]
    fn hom_counts_for_free_orbits() {
        let c = GSetCategory::z2(6);
        let g = c.free_orbit();
        let p = c.point();
        assert_eq!(c.hom(&p, &g).unwrap().len(), 0);
        assert_eq!(c.hom(&g, &g).unwrap().len(), 2);
        let gg = c.parse_object("2G").unwrap();
        assert_eq!(c.hom(&gg, &gg).unwrap().len(), 16);
        assert!(c.hom(&g, &gg).unwrap().iter().all(|f| c.check_map(f)));
    }

    #[test]
    fn product_of_free_orbits_is_two_free_orbits() {
        let c = GSetCategory::z2(6);
        let g = c.free_orbit();
        let pb = c.product(&g, &g).unwrap();
        assert_eq!(c.describe_obj(&pb.apex), "2G");
        let d = Diagram::pair(g.clone(), g.clone());
        let cone = Cone {
            apex: pb.apex.clone(),
            legs: vec![pb.left.clone(), pb.right.clone()],
        };
        assert!(verify_limit(&c, &d, &cone).unwrap());
    }

    #[test]
    fn laws_hold_on_snapshot() {
        let c = GSetCategory::z2(6);
        let r = check_category_laws(&c, 6).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.complete);
    }

    #[test]
    fn coproduct_of_points() {
        let c = GSetCategory::z2(6);
        let p = c.point();
        let cc = c.coproduct(&[p.clone(), p.clone()]).unwrap();
        assert_eq!(c.describe_obj(&cc.apex), "2*");
        assert_ne!(cc.injections[0], cc.injections[1]);
    }

    #[test]
    fn parse_and_describe_agree() {
        let c = GSetCategory::z2(6);
        for x in c.snapshot() {
            assert_eq!(c.parse_object(&c.describe_obj(&x)).unwrap(), x);
        }
        assert_eq!(c.parse_object("G+*").unwrap(), c.parse_object("*+G").unwrap());
    }
}
