//! Suites over a loaded site. Each randomized campaign draws from its own
//! generator seeded by `(seed, campaign name)`, so a suite produces the
//! same lines alone or inside `all`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::report::{sha256_hex, Report};
use super::{LoadedSite, SiteKind};
use crate::cohom::{bar_oracle, cech_colim_check, cech_complex, cohomology, FixedPointModule, GModule};
use crate::contract::{
    check_p_contractible, contractible_objects, dc_restriction_check, gamma_exactness_check, gamma_sections,
    is_weakly_contractible, iterate_p, verify_witness, ShortExactSequence,
};
use crate::fincat::{Category, FiniteCoproducts, FiniteLimits, GSetCategory};
use crate::linalg::PresentedGroup;
use crate::pro::ProObject;
use crate::protop::{
    check_pro_smallness, compose_transfinite, compose_weak, coproduct_covering_facts, equalizer_check, is_pro_covering,
    make_transfinite_covering, make_weak_covering, member_morphism, member_morphisms, pullback_formula_check,
    sieves_agree, transfinite_members, verify_weak_covering, weak_step, Dwc, ProCovering, ProSite, Tc, Topology,
};
use crate::sheaf::{yoneda, Presheaf};
use crate::site::{
    check_admissible, check_coherent, check_composition_closure, check_pullback_stability, check_subcanonical,
    generate_k, verify_k, CoveringFamily, SiteSpec,
};
use crate::tower::{check_site_transfinite, lift_oracle, split_tower_over_contractible, transfinite_composition, Marker, Tower};
use crate::verdict::{Check, CheckReport};
use crate::{Error, Result};

pub const SUITES: [&str; 6] = ["admissibility", "protopology", "towers", "contractibility", "cohomology", "all"];

type PO<C> = ProObject<<C as Category>::Obj, <C as Category>::Mor>;

/// Runs `suite` and returns the report with checks sorted by id.
/// `budget` is the number of cases per randomized campaign.
pub fn run_suite(site: &LoadedSite, suite: &str, seed: u64, budget: usize) -> Result<Report> {
    if !SUITES.contains(&suite) {
        return Err(Error::UnknownSuite(suite.to_string()));
    }
    let chains = site.flag_usize("chains", 2)?;
    let mut run = Run {
        suite,
        seed,
        budget,
        checks: Vec::new(),
    };
    match &site.kind {
        SiteKind::Table(s) => {
            run.generic(s, chains)?;
            if run.wants("cohomology") {
                run.checks.push(Check::unverified(
                    "cohomology",
                    "coefficient modules are defined on generated G-set sites only",
                ));
            }
        }
        SiteKind::GSet(s) => {
            run.generic(s, chains)?;
            run.gset(s, chains)?;
        }
    }
    Ok(Report::new(suite, &site.origin, seed, budget, sha256_hex(site.text.as_bytes()), run.checks))
}

struct Run<'a> {
    suite: &'a str,
    seed: u64,
    budget: usize,
    checks: Vec<Check>,
}

fn rng_for(seed: u64, campaign: &str) -> ChaCha8Rng {
    let h = Sha256::digest(campaign.as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&h[..8]);
    ChaCha8Rng::seed_from_u64(seed ^ u64::from_le_bytes(b))
}

/// Redraws of one seeded case before it is recorded as UNVERIFIED.
const DRAWS: usize = 12;

/// Reruns `f` on fresh draws while it leaves the snapshot.
fn attempt<T>(rng: &mut ChaCha8Rng, mut f: impl FnMut(&mut ChaCha8Rng) -> Result<T>) -> Result<T> {
    let mut last = String::new();
    for _ in 0..DRAWS {
        match f(rng) {
            Err(Error::OutOfBudget(m)) => last = m,
            r => return r,
        }
    }
    Err(Error::OutOfBudget(format!("{DRAWS} draws left the snapshot, last: {last}")))
}

/// Budget and snapshot errors become UNVERIFIED, broken constructions FAIL.
fn absorb(id: &str, e: Error) -> Result<Check> {
    match e {
        Error::OutOfBudget(m) | Error::Absent(m) | Error::Indeterminate(m) | Error::Precondition(m) => {
            Ok(Check::unverified(id, m))
        }
        e @ (Error::ConstructionFailed { .. } | Error::LawViolation(_) | Error::Malformed(_)) => {
            Ok(Check::fail(id, e.to_string()))
        }
        e => Err(e),
    }
}

impl Run<'_> {
    fn wants(&self, s: &str) -> bool {
        self.suite == s || self.suite == "all"
    }

    /// Prefixes every check of `r` with `prefix.`, or records the error
    /// under `prefix`.
    fn add(&mut self, prefix: &str, r: Result<CheckReport>) -> Result<()> {
        match r {
            Ok(rep) => {
                for mut c in rep.checks {
                    c.id = format!("{prefix}.{}", c.id);
                    self.checks.push(c);
                }
            }
            Err(e) => self.checks.push(absorb(prefix, e)?),
        }
        Ok(())
    }

    fn add_one(&mut self, id: String, r: Result<Check>) -> Result<()> {
        let c = match r {
            Ok(c) => c,
            Err(e) => absorb(&id, e)?,
        };
        self.checks.push(Check { id, ..c });
        Ok(())
    }

    fn generic<C: FiniteLimits + FiniteCoproducts + Clone>(&mut self, s: &SiteSpec<C>, chains: usize) -> Result<()> {
        if self.wants("admissibility") {
            self.admissibility(s)?;
        }
        if self.wants("towers") {
            self.towers(s)?;
        }
        if self.wants("protopology") || self.wants("contractibility") {
            let ps = ProSite::new(s.clone(), Topology::Weak, chains)?;
            if self.wants("protopology") {
                self.protopology(&ps)?;
            }
            if self.wants("contractibility") {
                self.contractibility(&ps)?;
            }
        }
        Ok(())
    }

    fn admissibility<C: FiniteLimits + FiniteCoproducts>(&mut self, s: &SiteSpec<C>) -> Result<()> {
        self.add("admissibility", check_coherent(s))?;
        self.add("admissibility", check_subcanonical(s))?;
        self.add("admissibility", check_admissible(s))?;
        self.add("admissibility", check_pullback_stability(s))?;
        self.add("admissibility", check_composition_closure(s, 2))?;
        self.add("admissibility", generate_k(s).and_then(|k| verify_k(s, &k)))
    }

    /// Random epi towers over contractible bases, split stage by stage.
    fn towers<C: FiniteLimits>(&mut self, s: &SiteSpec<C>) -> Result<()> {
        let c = &s.cat;
        let bases = match contractible_objects(s)? {
            Ok(v) if !v.is_empty() => v,
            Ok(_) => {
                self.checks.push(Check::unverified("towers", "no contractible objects in the snapshot"));
                return Ok(());
            }
            Err(x) => {
                self.checks
                    .push(Check::unverified("towers", format!("contractibility of {} is unknown", c.describe_obj(&x))));
                return Ok(());
            }
        };
        let mut rng = rng_for(self.seed, "towers.split");
        let mut built = Vec::new();
        for n in 0..self.budget {
            let id = format!("towers.split.{n}");
            let base = bases.choose(&mut rng).expect("nonempty").clone();
            let len = rng.gen_range(1..=8);
            let r = (|| -> Result<Check> {
                let mut stage = base.clone();
                let mut steps = Vec::new();
                for _ in 0..len {
                    let covers = s.covering_morphisms_onto(&stage)?;
                    let e = covers
                        .choose(&mut rng)
                        .ok_or_else(|| Error::Absent("no covering morphism onto a stage".into()))?
                        .clone();
                    stage = c.source(&e);
                    steps.push(e);
                }
                let t = Tower::new(c, base.clone(), steps, vec![Marker::EPI.and(Marker::COVERING); len])?;
                let sec = split_tower_over_contractible(c, &t, lift_oracle(c))?;
                let ok = c.compose(&transfinite_composition(c, &t)?, &sec)? == c.identity(&base);
                let detail = format!("length {len} over {}", c.describe_obj(&base));
                built.push(t);
                Ok(Check::from_bool("", ok, detail))
            })();
            self.add_one(id, r)?;
        }
        self.add("towers", check_site_transfinite(s, &built))
    }

    fn protopology<C: FiniteLimits + FiniteCoproducts>(&mut self, ps: &ProSite<C>) -> Result<()> {
        let c = &ps.base.cat;
        let pc = &ps.pro;
        self.add("protopology", check_pro_smallness(ps))?;
        self.add("protopology", coproduct_covering_facts(ps))?;
        let probes: Vec<PO<C>> = pc.probes().iter().filter(|p| p.index.maximum().is_some()).cloned().collect();
        let top = |f: &PO<C>| f.index.maximum().expect("probes have a final level");
        let random_family = |rng: &mut ChaCha8Rng, f: &PO<C>| -> Result<CoveringFamily<C::Obj, C::Mor>> {
            let fams = ps.base.families(&f.objs[top(f)])?;
            fams.choose(rng)
                .cloned()
                .ok_or_else(|| Error::Absent("no basis family onto the final level".into()))
        };
        let random_chain = |rng: &mut ChaCha8Rng, f: &PO<C>, max: usize| -> Result<Tc<C>> {
            let mut stage = f.clone();
            let mut steps: Vec<Dwc<C>> = Vec::new();
            for _ in 0..rng.gen_range(0..=max) {
                let covers = ps.base.covering_morphisms_onto(&stage.objs[top(&stage)])?;
                let e = covers.choose(rng).expect("identities cover").clone();
                let d = weak_step(ps, &stage, &e)?;
                stage = d.members[0].clone();
                steps.push(d);
            }
            let fam = random_family(rng, &stage)?;
            let t = make_weak_covering(ps, &stage, &fam)?;
            make_transfinite_covering(ps, f, steps, t)
        };

        let mut rng = rng_for(self.seed, "protopology.compose-weak");
        for n in 0..self.budget {
            let id = format!("protopology.compose-weak.{n}");
            let r = attempt(&mut rng, |rng| {
                let f = probes.choose(rng).expect("constants are probes").clone();
                let outer = make_weak_covering(ps, &f, &random_family(rng, &f)?)?;
                let inners = outer
                    .members
                    .iter()
                    .map(|m| make_weak_covering(ps, m, &random_family(rng, m)?))
                    .collect::<Result<Vec<_>>>()?;
                let out = compose_weak(ps, &outer, &inners)?;
                let mut composite = Vec::new();
                for (w, inner) in inners.iter().enumerate() {
                    let om = member_morphism(ps, &outer, w)?;
                    for im in member_morphisms(ps, inner)? {
                        composite.push(pc.compose(&om, &im)?);
                    }
                }
                let bad = sieves_agree(ps, &f, &member_morphisms(ps, &out)?, &composite)?;
                Ok(match bad {
                    Some(w) => Check::fail("", w),
                    None => Check::pass("", format!("{} members over {}", composite.len(), pc.describe_obj(&f))),
                })
            });
            self.add_one(id, r)?;
        }

        let mut rng = rng_for(self.seed, "protopology.compose-transfinite");
        for n in 0..self.budget {
            let id = format!("protopology.compose-transfinite.{n}");
            let r = attempt(&mut rng, |rng| {
                let f = probes.choose(rng).expect("constants are probes").clone();
                let outer = random_chain(rng, &f, 1)?;
                let inners = outer
                    .top
                    .members
                    .iter()
                    .map(|m| random_chain(rng, m, 1))
                    .collect::<Result<Vec<_>>>()?;
                let out = compose_transfinite(ps, &outer, &inners)?;
                let outer_members = transfinite_members(ps, &outer)?;
                let mut composite = Vec::new();
                for (w, t) in inners.iter().enumerate() {
                    for m in transfinite_members(ps, t)? {
                        composite.push(pc.compose(&outer_members[w], &m)?);
                    }
                }
                let bad = sieves_agree(ps, &f, &transfinite_members(ps, &out)?, &composite)?;
                Ok(match bad {
                    Some(w) => Check::fail("", w),
                    None => Check::pass("", format!("chain {} with {} members", out.chain_length(), composite.len())),
                })
            });
            self.add_one(id, r)?;
        }

        // pro-coverings are the members of random weak steps on probes
        let mut rng = rng_for(self.seed, "protopology.equalizer");
        for n in 0..self.budget {
            let id = format!("protopology.equalizer.{n}");
            let r = attempt(&mut rng, |rng| {
                let f = probes.choose(rng).expect("constants are probes").clone();
                let covers = ps.base.covering_morphisms_onto(&f.objs[top(&f)])?;
                let e = covers.choose(rng).expect("identities cover").clone();
                let m = member_morphism(ps, &weak_step(ps, &f, &e)?, 0)?;
                if let ProCovering::Unknown(why) = is_pro_covering(ps, &m, ps.depth.max(1))? {
                    return Err(Error::OutOfBudget(why));
                }
                let mut rep = CheckReport::new();
                for (t, w) in probes.iter().enumerate() {
                    for mut ch in equalizer_check(ps, &m, w)?.checks {
                        ch.id = format!("target{t}");
                        rep.push(ch);
                    }
                }
                Ok(rep)
            });
            self.add(&id, r)?;
        }

        // sheaves: the terminal presheaf and every representable
        let mut sheaves: Vec<(String, Presheaf<C::Obj, C::Mor>)> = vec![("one".into(), Presheaf::constant(c, 1)?)];
        for x in c.snapshot() {
            sheaves.push((format!("y({})", c.describe_obj(&x)), yoneda(c, &x)?));
        }
        let small: Vec<PO<C>> = pc.probes().iter().filter(|p| p.len() <= 3).cloned().collect();
        for (name, k) in &sheaves {
            self.add(&format!("protopology.pullback.{name}"), pullback_formula_check(ps, k, &small))?;
        }
        Ok(())
    }

    fn contractibility<C: FiniteLimits + FiniteCoproducts>(&mut self, ps: &ProSite<C>) -> Result<()> {
        let s = &ps.base;
        let c = &s.cat;
        for x in c.snapshot() {
            let id = format!("contractibility.object.{}", c.describe_obj(&x));
            let r = (|| -> Result<Check> {
                let w = is_weakly_contractible(s, &x)?;
                if !verify_witness(c, &w)? {
                    return Ok(Check::fail("", "a recorded splitting is not a section"));
                }
                Ok(match (w.is_contractible(), &w.failure) {
                    (Some(true), _) => Check::pass(
                        "",
                        format!("every snapshot covering morphism splits ({})", w.splittings.len()),
                    ),
                    (Some(false), Some(e)) => Check::pass("", format!("not contractible, {} does not split", c.describe_mor(e))),
                    _ => Check::unverified("", "enumeration left the budget"),
                })
            })();
            self.add_one(id, r)?;
        }
        let mut probes: Vec<(String, Presheaf<C::Obj, C::Mor>)> = vec![("one".into(), Presheaf::constant(c, 1)?)];
        if let Ok(Ok(cs)) = contractible_objects(s) {
            for x in cs {
                probes.push((format!("y({})", c.describe_obj(&x)), yoneda(c, &x)?));
            }
        }
        if let Ok(t) = c.terminal() {
            probes.push((format!("y({})", c.describe_obj(&t)), yoneda(c, &t)?));
        }
        probes.dedup_by(|a, b| a.0 == b.0);
        self.add("contractibility", dc_restriction_check(s, &probes))?;
        let k = generate_k(s)?;
        for x in c.snapshot() {
            let prefix = format!("contractibility.p.{}", c.describe_obj(&x));
            let u = ps.pro.constant(&x);
            let rec = match iterate_p(ps, &u, &k, 3) {
                Ok(r) => r,
                Err(e) => {
                    self.checks.push(absorb(&prefix, e)?);
                    continue;
                }
            };
            let mut bad = None;
            for (i, d) in rec.covering.steps.iter().enumerate() {
                if let Some(w) = verify_weak_covering(ps, d)? {
                    bad = Some(format!("step {i}: {w}"));
                    break;
                }
            }
            let mut rep = CheckReport::new();
            rep.push_scoped("tower", bad, rec.covering.steps.len(), 0);
            rep.push(Check::pass(
                "result",
                format!("{} after {} rounds", ps.pro.describe_obj(&rec.result()), rec.iterations()),
            ));
            self.add(&prefix, Ok(rep))?;
            self.add(&prefix, check_p_contractible(ps, &rec, &k))?;
        }
        Ok(())
    }

    fn gset(&mut self, s: &SiteSpec<GSetCategory>, chains: usize) -> Result<()> {
        let c = &s.cat;
        let group = c.group().clone();
        let mut seqs = vec![ShortExactSequence::doubling(group.clone())];
        if group.order() == 2 {
            seqs.push(ShortExactSequence::augmentation());
        }
        if self.wants("contractibility") {
            for seq in &seqs {
                for x in c.snapshot() {
                    let contractible = is_weakly_contractible(s, &x)?.is_contractible();
                    if contractible == Some(true) {
                        self.add("contractibility", gamma_exactness_check(s, &x, seq))?;
                        continue;
                    }
                    let id = format!("contractibility.gamma-boundary.{}.{}", seq.name, c.describe_obj(&x));
                    let r = gamma_sections(s, &x, seq).map(|o| match o.failure {
                        None => Check::pass("", "exact"),
                        Some(w) => Check::pass("", format!("{w} exactness fails, cokernel {}", o.cokernel)),
                    });
                    self.add_one(id, r)?;
                }
            }
        }
        if self.wants("cohomology") {
            self.cohomology(s, chains)?;
        }
        Ok(())
    }

    fn cohomology(&mut self, s: &SiteSpec<GSetCategory>, chains: usize) -> Result<()> {
        let c = &s.cat;
        let group = c.group().clone();
        let mut modules = vec![
            ("Z", GModule::trivial(group.clone(), PresentedGroup::free(1))),
            ("Z2", GModule::trivial(group.clone(), PresentedGroup::cyclic(1, 2))),
        ];
        if group.order() == 2 {
            modules.push(("Zsign", GModule::sign()));
        }
        let g = c.free_orbit();
        let to_pt = c.to_terminal(&g)?;
        let mut covers = vec![("G", vec![to_pt.clone()], 4)];
        if let Ok(two) = c.from_counts(&[0, 2]) {
            if c.snapshot().contains(&two) {
                covers.push(("2G", vec![c.to_terminal(&two)?], 2));
            }
        }
        covers.push(("G+G", vec![to_pt.clone(), to_pt], 2));
        for (mname, m) in &modules {
            let k = FixedPointModule { cat: c, module: m };
            for (cname, fam, top) in &covers {
                let prefix = format!("cohomology.cech.{cname}.{mname}");
                match cech_complex(c, &k, fam, *top) {
                    Ok(cx) => {
                        for n in 0..=*top {
                            let got = cohomology(&cx, n)?;
                            let want = bar_oracle(m, n);
                            self.checks.push(Check::from_bool(
                                format!("{prefix}.{n}"),
                                got.invariants == want.invariants,
                                format!("{got}, oracle {}", want.invariants),
                            ));
                        }
                    }
                    Err(e) => self.checks.push(absorb(&prefix, e)?),
                }
            }
        }
        let ps = ProSite::new(s.clone(), Topology::Weak, chains)?;
        let z = &modules[0].1;
        let k = FixedPointModule { cat: c, module: z };
        let small: Vec<_> = c.snapshot().into_iter().filter(|x| c.size(x) <= 2 * group.order()).collect();
        let mut rng = rng_for(self.seed, "cohomology.colim");
        for n in 0..self.budget {
            let id = format!("cohomology.colim.{n}");
            let r = attempt(&mut rng, |rng| {
                // a two-level chain U(0) -> U(1) and a covering of U(1)
                let u1 = small.choose(rng).expect("snapshot is nonempty").clone();
                let mut pairs = Vec::new();
                for u0 in &small {
                    pairs.extend(c.hom(u0, &u1)?);
                }
                let step = pairs.choose(rng).expect("identity is a map").clone();
                let u = ProObject::chain(c, &[step])?;
                let covers: Vec<_> = s
                    .covering_morphisms_onto(&u1)?
                    .into_iter()
                    .filter(|e| c.size(&e.src) <= 2 * group.order())
                    .collect();
                let e = covers.choose(rng).expect("identities cover").clone();
                let f = member_morphism(&ps, &weak_step(&ps, &u, &e)?, 0)?;
                if f.src.objs.iter().any(|x| !c.in_snapshot(x)) {
                    return Err(Error::OutOfBudget("member level outside the snapshot".into()));
                }
                cech_colim_check(&ps, &k, &f, 2)
            });
            self.add(&id, r)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Verdict;
    use crate::workbench::load_site;

    #[test]
    fn unknown_suite_is_an_error() {
        let s = load_site("b2").unwrap();
        assert!(matches!(run_suite(&s, "nope", 1, 1), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn b2_fails_admissibility_on_disjointness() {
        let s = load_site("b2").unwrap();
        let r = run_suite(&s, "admissibility", 42, 2).unwrap();
        let failed: Vec<&str> = r.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.id.as_str()).collect();
        assert_eq!(failed, ["admissibility.admissible.disjoint"]);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn campaigns_are_independent_of_the_suite() {
        let s = load_site("bg2").unwrap();
        let towers = run_suite(&s, "towers", 5, 3).unwrap();
        assert!(towers.checks.iter().all(|c| c.verdict == Verdict::Pass), "{:?}", towers.checks);
        let again = run_suite(&s, "towers", 5, 3).unwrap();
        assert_eq!(towers.render(), again.render());
    }
}
