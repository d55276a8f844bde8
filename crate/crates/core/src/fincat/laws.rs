use super::{Category, Cocone, Cone, Diagram};
use crate::{Error, Result};

/// Outcome of [`check_category_laws`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub objects_scanned: usize,
    pub triples_checked: usize,
    pub violations: Vec<String>,
    /// True when the whole snapshot fit in the budget.
    pub complete: bool,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check identity and associativity laws on the first `budget` snapshot
/// objects. A composite whose endpoints are wrong is a malformed
/// presentation, not a law violation.
pub fn check_category_laws<C: Category>(c: &C, budget: usize) -> Result<LawReport> {
    if budget == 0 {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    let snap = c.snapshot();
    let objs: Vec<_> = snap.iter().take(budget).cloned().collect();
    let mut violations = Vec::new();
    let mut homs = std::collections::HashMap::new();
    for a in &objs {
        for b in &objs {
            homs.insert((a.clone(), b.clone()), c.hom(a, b)?);
        }
    }
    for a in &objs {
        let id = c.identity(a);
        if c.source(&id) != *a || c.target(&id) != *a {
            violations.push(format!("identity of {} has wrong endpoints", c.describe_obj(a)));
        }
        for b in &objs {
            for f in &homs[&(a.clone(), b.clone())] {
                if c.source(f) != *a || c.target(f) != *b {
                    return Err(Error::Malformed(format!(
                        "{} listed in wrong hom-set",
                        c.describe_mor(f)
                    )));
                }
                if c.compose(f, &c.identity(a))? != *f {
                    violations.push(format!("{} ∘ id != itself", c.describe_mor(f)));
                }
                if c.compose(&c.identity(b), f)? != *f {
                    violations.push(format!("id ∘ {} != itself", c.describe_mor(f)));
                }
            }
        }
    }
    let mut triples = 0;
    for a in &objs {
        for b in &objs {
            for f in &homs[&(a.clone(), b.clone())] {
                for cc in &objs {
                    for g in &homs[&(b.clone(), cc.clone())] {
                        let gf = c.compose(g, f)?;
                        if c.source(&gf) != *a || c.target(&gf) != *cc {
                            return Err(Error::Malformed(format!(
                                "composite {} has wrong endpoints",
                                c.describe_mor(&gf)
                            )));
                        }
                        for d in &objs {
                            for h in &homs[&(cc.clone(), d.clone())] {
                                triples += 1;
                                let l = c.compose(h, &gf)?;
                                let r = c.compose(&c.compose(h, g)?, f)?;
                                if l != r {
                                    violations.push(format!(
                                        "associativity fails on ({}, {}, {})",
                                        c.describe_mor(h),
                                        c.describe_mor(g),
                                        c.describe_mor(f)
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(LawReport {
        objects_scanned: objs.len(),
        triples_checked: triples,
        violations,
        complete: objs.len() == snap.len(),
    })
}

/// All cones over `d` with apex `x`.
fn cones_at<C: Category>(c: &C, d: &Diagram<C::Obj, C::Mor>, x: &C::Obj) -> Result<Vec<Vec<C::Mor>>> {
    let mut partial: Vec<Vec<C::Mor>> = vec![vec![]];
    for node in &d.nodes {
        let hs = c.hom(x, node)?;
        let mut next = Vec::new();
        for p in &partial {
            for h in &hs {
                let mut q = p.clone();
                q.push(h.clone());
                next.push(q);
            }
        }
        partial = next;
    }
    let mut out = Vec::new();
    'cone: for legs in partial {
        for (i, j, m) in &d.arrows {
            if c.compose(m, &legs[*i])? != legs[*j] {
                continue 'cone;
            }
        }
        out.push(legs);
    }
    Ok(out)
}

/// Check a cone is a limit against every cone in the snapshot: each must
/// factor through it uniquely.
pub fn verify_limit<C: Category>(
    c: &C,
    d: &Diagram<C::Obj, C::Mor>,
    cone: &Cone<C::Obj, C::Mor>,
) -> Result<bool> {
    if cone.legs.len() != d.nodes.len() {
        return Ok(false);
    }
    for (i, j, m) in &d.arrows {
        if c.compose(m, &cone.legs[*i])? != cone.legs[*j] {
            return Ok(false);
        }
    }
    for x in c.snapshot() {
        let homs = c.hom(&x, &cone.apex)?;
        for legs in cones_at(c, d, &x)? {
            let mut count = 0;
            for h in &homs {
                let mut ok = true;
                for (k, leg) in cone.legs.iter().enumerate() {
                    if c.compose(leg, h)? != legs[k] {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    count += 1;
                }
            }
            if count != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Search the snapshot for a limit cone. `Ok(None)` means no apex in scope.
pub fn limit_search<C: Category>(
    c: &C,
    d: &Diagram<C::Obj, C::Mor>,
) -> Result<Option<Cone<C::Obj, C::Mor>>> {
    for x in c.snapshot() {
        for legs in cones_at(c, d, &x)? {
            let cone = Cone { apex: x.clone(), legs };
            if verify_limit(c, d, &cone)? {
                return Ok(Some(cone));
            }
        }
    }
    Ok(None)
}

fn cocones_at<C: Category>(c: &C, parts: &[C::Obj], x: &C::Obj) -> Result<Vec<Vec<C::Mor>>> {
    let mut partial: Vec<Vec<C::Mor>> = vec![vec![]];
    for p in parts {
        let hs = c.hom(p, x)?;
        let mut next = Vec::new();
        for q in &partial {
            for h in &hs {
                let mut r = q.clone();
                r.push(h.clone());
                next.push(r);
            }
        }
        partial = next;
    }
    Ok(partial)
}

/// Check couniversality of a coproduct cocone against every snapshot cocone.
pub fn verify_coproduct<C: Category>(
    c: &C,
    parts: &[C::Obj],
    cocone: &Cocone<C::Obj, C::Mor>,
) -> Result<bool> {
    if cocone.injections.len() != parts.len() {
        return Ok(false);
    }
    for (inj, p) in cocone.injections.iter().zip(parts) {
        if c.source(inj) != *p || c.target(inj) != cocone.apex {
            return Ok(false);
        }
    }
    for x in c.snapshot() {
        let homs = c.hom(&cocone.apex, &x)?;
        for maps in cocones_at(c, parts, &x)? {
            let mut count = 0;
            for h in &homs {
                let mut ok = true;
                for (inj, m) in cocone.injections.iter().zip(&maps) {
                    if c.compose(h, inj)? != *m {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    count += 1;
                }
            }
            if count != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Search the snapshot for a coproduct cocone.
pub fn coproduct_search<C: Category>(
    c: &C,
    parts: &[C::Obj],
) -> Result<Option<Cocone<C::Obj, C::Mor>>> {
    for x in c.snapshot() {
        for injections in cocones_at(c, parts, &x)? {
            let cocone = Cocone {
                apex: x.clone(),
                injections,
            };
            if verify_coproduct(c, parts, &cocone)? {
                return Ok(Some(cocone));
            }
        }
    }
    Ok(None)
}

/// Categorical epimorphism test: right-cancellable against all maps out of
/// `target(f)` into the cotest objects.
pub fn is_epi<C: Category>(c: &C, f: &C::Mor, cotests: &[C::Obj]) -> Result<bool> {
    if cotests.is_empty() {
        return Err(Error::Indeterminate("empty cotest list".into()));
    }
    let b = c.target(f);
    for z in cotests {
        let hs = c.hom(&b, z)?;
        let composites: Vec<C::Mor> = hs.iter().map(|h| c.compose(h, f)).collect::<Result<_>>()?;
        for i in 0..hs.len() {
            for j in i + 1..hs.len() {
                if composites[i] == composites[j] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// An explicit isomorphism `a -> b` with its inverse, if one exists.
pub fn find_isomorphism<C: Category>(
    c: &C,
    a: &C::Obj,
    b: &C::Obj,
) -> Result<Option<(C::Mor, C::Mor)>> {
    let back = c.hom(b, a)?;
    for f in c.hom(a, b)? {
        for g in &back {
            if c.compose(g, &f)? == c.identity(a) && c.compose(&f, g)? == c.identity(b) {
                return Ok(Some((f, g.clone())));
            }
        }
    }
    Ok(None)
}
