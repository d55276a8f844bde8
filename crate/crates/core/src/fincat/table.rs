use std::collections::{BTreeMap, HashMap};

use super::{
    coproduct_search, limit_search, Category, Cocone, Diagram, FiniteCoproducts, FiniteLimits,
    PullbackCone,
};
use crate::{Error, Result};

/// A category given by an explicit composition table. Identifiers are
/// opaque strings; equality is identifier equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableCategory {
    objects: Vec<String>,
    morphisms: BTreeMap<String, (String, String)>,
    identities: BTreeMap<String, String>,
    compose: HashMap<(String, String), String>,
    homs: BTreeMap<(String, String), Vec<String>>,
}

#[derive(Debug, Default, Clone)]
pub struct TableCategoryBuilder {
    objects: Vec<String>,
    morphisms: Vec<(String, String, String)>,
    identities: Vec<(String, String)>,
    compose: Vec<(String, String, String)>,
}

impl TableCategoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&mut self, name: &str) -> &mut Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn morphism(&mut self, name: &str, src: &str, dst: &str) -> &mut Self {
        self.morphisms.push((name.into(), src.into(), dst.into()));
        self
    }

    /// Declare `id` as the identity of `obj` (adds the morphism if needed).
    pub fn identity(&mut self, obj: &str, id: &str) -> &mut Self {
        self.identities.push((obj.into(), id.into()));
        self
    }

    /// `g ∘ f = h`.
    pub fn compose(&mut self, g: &str, f: &str, h: &str) -> &mut Self {
        self.compose.push((g.into(), f.into(), h.into()));
        self
    }

    /// Validate and build. Identity composites are filled in automatically.
    pub fn build(&self) -> Result<TableCategory> {
        let mut morphisms = BTreeMap::new();
        for o in &self.objects {
            if self.objects.iter().filter(|x| *x == o).count() > 1 {
                return Err(Error::Malformed(format!("duplicate object {o}")));
            }
        }
        let mut identities = BTreeMap::new();
        for (o, id) in &self.identities {
            if !self.objects.contains(o) {
                return Err(Error::Malformed(format!("identity for unknown object {o}")));
            }
            morphisms.insert(id.clone(), (o.clone(), o.clone()));
            identities.insert(o.clone(), id.clone());
        }
        for o in &self.objects {
            if !identities.contains_key(o) {
                let id = format!("id_{o}");
                morphisms.insert(id.clone(), (o.clone(), o.clone()));
                identities.insert(o.clone(), id);
            }
        }
        for (m, s, d) in &self.morphisms {
            if !self.objects.contains(s) || !self.objects.contains(d) {
                return Err(Error::Malformed(format!("morphism {m} has unknown endpoint")));
            }
            if let Some(old) = morphisms.insert(m.clone(), (s.clone(), d.clone())) {
                if old != (s.clone(), d.clone()) {
                    return Err(Error::Malformed(format!("morphism {m} declared twice")));
                }
            }
        }
        let mut compose = HashMap::new();
        for (g, f, h) in &self.compose {
            let (fs, ft) = morphisms
                .get(f)
                .ok_or_else(|| Error::Malformed(format!("unknown morphism {f}")))?;
            let (gs, gt) = morphisms
                .get(g)
                .ok_or_else(|| Error::Malformed(format!("unknown morphism {g}")))?;
            let (hs, ht) = morphisms
                .get(h)
                .ok_or_else(|| Error::Malformed(format!("unknown morphism {h}")))?;
            if ft != gs {
                return Err(Error::Malformed(format!(
                    "compose({g},{f}) defined but target({f})={ft} != source({g})={gs}"
                )));
            }
            if hs != fs || ht != gt {
                return Err(Error::Malformed(format!(
                    "compose({g},{f})={h} has wrong endpoints"
                )));
            }
            if let Some(old) = compose.insert((g.clone(), f.clone()), h.clone()) {
                if &old != h {
                    return Err(Error::Malformed(format!("compose({g},{f}) defined twice")));
                }
            }
        }
        for (m, (s, d)) in &morphisms {
            let ids = &identities[s];
            let idd = &identities[d];
            compose.entry((m.clone(), ids.clone())).or_insert_with(|| m.clone());
            compose.entry((idd.clone(), m.clone())).or_insert_with(|| m.clone());
        }
        for (f, (_, ft)) in &morphisms {
            for (g, (gs, _)) in &morphisms {
                if ft == gs && !compose.contains_key(&(g.clone(), f.clone())) {
                    return Err(Error::Malformed(format!("compose({g},{f}) missing")));
                }
            }
        }
        let mut homs: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        for (m, (s, d)) in &morphisms {
            homs.entry((s.clone(), d.clone())).or_default().push(m.clone());
        }
        Ok(TableCategory {
            objects: self.objects.clone(),
            morphisms,
            identities,
            compose,
            homs,
        })
    }
}

impl TableCategory {
    /// The poset on `elements` with `a -> b` iff `leq(a, b)`. Morphisms are
    /// named `a<=b`; identities `id_a`.
    pub fn poset(elements: &[&str], leq: impl Fn(usize, usize) -> bool) -> Result<TableCategory> {
        let mut b = TableCategoryBuilder::new();
        for e in elements {
            b.object(e);
        }
        let name = |i: usize, j: usize| {
            if i == j {
                format!("id_{}", elements[i])
            } else {
                format!("{}<={}", elements[i], elements[j])
            }
        };
        for i in 0..elements.len() {
            for j in 0..elements.len() {
                if i != j && leq(i, j) {
                    b.morphism(&name(i, j), elements[i], elements[j]);
                    for k in 0..elements.len() {
                        if j != k && leq(j, k) {
                            if !leq(i, k) {
                                return Err(Error::Malformed("order relation not transitive".into()));
                            }
                            b.compose(&name(j, k), &name(i, j), &name(i, k));
                        }
                    }
                }
            }
        }
        b.build()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &String> {
        self.morphisms.keys()
    }

    pub fn has_morphism(&self, m: &str) -> bool {
        self.morphisms.contains_key(m)
    }

    fn pullback_diagram(&self, f: &String, g: &String) -> Diagram<String, String> {
        let (a, c) = self.morphisms[f].clone();
        let (b, _) = self.morphisms[g].clone();
        Diagram::cospan(a, b, c, f.clone(), g.clone())
    }
}

impl Category for TableCategory {
    type Obj = String;
    type Mor = String;

    fn source(&self, f: &String) -> String {
        self.morphisms[f].0.clone()
    }

    fn target(&self, f: &String) -> String {
        self.morphisms[f].1.clone()
    }

    fn identity(&self, x: &String) -> String {
        self.identities[x].clone()
    }

    fn compose(&self, g: &String, f: &String) -> Result<String> {
        self.compose
            .get(&(g.clone(), f.clone()))
            .cloned()
            .ok_or_else(|| Error::Malformed(format!("{g} ∘ {f} not composable")))
    }

    fn hom(&self, a: &String, b: &String) -> Result<Vec<String>> {
        Ok(self
            .homs
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_default())
    }

    fn snapshot(&self) -> Vec<String> {
        self.objects.clone()
    }

    fn in_snapshot(&self, x: &String) -> bool {
        self.objects.contains(x)
    }

    fn describe_obj(&self, x: &String) -> String {
        x.clone()
    }

    fn describe_mor(&self, f: &String) -> String {
        f.clone()
    }
}

impl FiniteLimits for TableCategory {
    fn terminal(&self) -> Result<String> {
        limit_search(self, &Diagram::empty())?
            .map(|c| c.apex)
            .ok_or_else(|| Error::Absent("no terminal object".into()))
    }

    fn to_terminal(&self, x: &String) -> Result<String> {
        let t = self.terminal()?;
        self.hom(x, &t)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Absent("no map to terminal".into()))
    }

    fn pullback(&self, f: &String, g: &String) -> Result<PullbackCone<String, String>> {
        if self.target(f) != self.target(g) {
            return Err(Error::Malformed(format!("{f}, {g} do not form a cospan")));
        }
        let cone = limit_search(self, &self.pullback_diagram(f, g))?
            .ok_or_else(|| Error::Absent(format!("no pullback of {f}, {g}")))?;
        Ok(PullbackCone {
            apex: cone.apex,
            left: cone.legs[0].clone(),
            right: cone.legs[1].clone(),
        })
    }

    fn pullback_mediate(
        &self,
        cone: &PullbackCone<String, String>,
        a: &String,
        b: &String,
    ) -> Result<String> {
        let x = self.source(a);
        for h in self.hom(&x, &cone.apex)? {
            if self.compose(&cone.left, &h)? == *a && self.compose(&cone.right, &h)? == *b {
                return Ok(h);
            }
        }
        Err(Error::Absent("no mediating morphism".into()))
    }
}

impl FiniteCoproducts for TableCategory {
    fn initial(&self) -> Result<String> {
        coproduct_search(self, &[])?
            .map(|c| c.apex)
            .ok_or_else(|| Error::Absent("no initial object".into()))
    }

    fn initial_map(&self, x: &String) -> Result<String> {
        let i = self.initial()?;
        self.hom(&i, x)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Absent("no map from initial".into()))
    }

    fn coproduct(&self, parts: &[String]) -> Result<Cocone<String, String>> {
        coproduct_search(self, parts)?
            .ok_or_else(|| Error::Absent(format!("no coproduct of {parts:?}")))
    }

    fn copair(&self, cocone: &Cocone<String, String>, maps: &[String]) -> Result<String> {
        let t = self.target(&maps[0]);
        for h in self.hom(&cocone.apex, &t)? {
            let mut ok = true;
            for (inj, m) in cocone.injections.iter().zip(maps) {
                if self.compose(&h, inj)? != *m {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(h);
            }
        }
        Err(Error::Absent("no copairing".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monoid_table_builds() {
        let mut b = TableCategoryBuilder::new();
        b.object("X").morphism("e", "X", "X").compose("e", "e", "e");
        let c = b.build().unwrap();
        assert_eq!(c.hom(&"X".into(), &"X".into()).unwrap().len(), 2);
        assert_eq!(c.compose(&"e".into(), &"id_X".into()).unwrap(), "e");
    }

    #[test]
    fn non_composable_entry_is_malformed() {
        let mut b = TableCategoryBuilder::new();
        b.object("A").object("B");
        b.morphism("f", "A", "B").morphism("g", "A", "B");
        b.compose("g", "f", "f");
        assert!(matches!(b.build(), Err(Error::Malformed(_))));
    }

    #[test]
    fn poset_meets_are_pullbacks() {
        let c = TableCategory::poset(&["0", "a", "b", "1"], |i, j| {
            i == j || i == 0 || j == 3
        })
        .unwrap();
        let pb = c.pullback(&"a<=1".into(), &"b<=1".into()).unwrap();
        assert_eq!(pb.apex, "0");
        assert_eq!(c.terminal().unwrap(), "1");
        assert_eq!(c.initial().unwrap(), "0");
        assert_eq!(c.coproduct(&["a".into(), "b".into()]).unwrap().apex, "1");
    }
}
