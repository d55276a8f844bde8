//! The `.site` text format.
//!
//! ```text
//! # comment to end of line
//! [site]          key = value: name, kind (table | gset), group, budget
//! [objects]       whitespace-separated object names
//! [morphisms]     name : source -> target
//! [identities]    object = name
//! [compose]       g . f = h        (g ∘ f = h)
//! [coverings]     target <= m1, m2, ...   (empty list allowed)
//! [rule]          jointly-surjective [max N]
//! [flags]         key = value
//! ```
//!
//! Table sites need `[objects]` and may use `[coverings]`; generated sites
//! take `group` and `budget` and a `[rule]`. Names may not contain
//! whitespace, `#` or `,`.

use std::collections::BTreeMap;

use crate::fincat::{check_category_laws, Category, FiniteGroup, GSetCategory, TableCategory, TableCategoryBuilder};
use crate::site::{jointly_surjective, Basis, CoveringFamily, SiteSpec};
use crate::{Error, Result};

/// A validated site with its source text.
pub struct LoadedSite {
    pub name: String,
    /// Where the text came from: a path, or `fixture:<name>`.
    pub origin: String,
    pub text: String,
    pub kind: SiteKind,
    pub flags: BTreeMap<String, String>,
}

pub enum SiteKind {
    Table(SiteSpec<TableCategory>),
    GSet(SiteSpec<GSetCategory>),
}

impl LoadedSite {
    pub fn flag_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.flags.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Malformed(format!("flag {key} = {v} is not a count"))),
        }
    }
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// `(column, token)` pairs, columns 1-based in characters.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (ci, (bi, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((ci, bi)),
            (true, Some((c0, b0))) => {
                out.push((c0 + 1, &line[b0..bi]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c0, b0)) = start {
        out.push((c0 + 1, &line[b0..]));
    }
    out
}

struct Line<'a> {
    no: usize,
    toks: Vec<(usize, &'a str)>,
    end: usize,
}

impl Line<'_> {
    fn expect_len(&self, n: usize, shape: &str) -> Result<()> {
        if self.toks.len() != n {
            let col = self.toks.get(n).map_or(self.end, |t| t.0);
            return Err(perr(self.no, col, format!("expected `{shape}`")));
        }
        Ok(())
    }

    fn expect_sym(&self, i: usize, sym: &str, shape: &str) -> Result<()> {
        if self.toks[i].1 != sym {
            return Err(perr(self.no, self.toks[i].0, format!("expected `{sym}` in `{shape}`")));
        }
        Ok(())
    }

    fn key_value(&self) -> Result<(String, String)> {
        if self.toks.len() < 3 || self.toks[1].1 != "=" {
            return Err(perr(self.no, self.toks[0].0, "expected `key = value`"));
        }
        let value = self.toks[2..].iter().map(|t| t.1).collect::<Vec<_>>().join(" ");
        Ok((self.toks[0].1.to_string(), value))
    }
}

const SECTIONS: [&str; 7] = ["site", "objects", "morphisms", "identities", "compose", "coverings", "rule"];

pub fn parse_site(text: &str, origin: &str) -> Result<LoadedSite> {
    let mut sections: BTreeMap<String, Vec<Line>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        if toks.is_empty() {
            continue;
        }
        let end = body.trim_end().chars().count() + 1;
        let first = toks[0];
        if first.1.starts_with('[') {
            let name = body.trim();
            if !name.ends_with(']') || toks.len() != 1 {
                return Err(perr(no, first.0, "malformed section header"));
            }
            let name = &name[1..name.len() - 1];
            if !SECTIONS.contains(&name) && name != "flags" {
                return Err(perr(no, first.0 + 1, format!("unknown section `{name}`")));
            }
            if sections.contains_key(name) {
                return Err(perr(no, first.0, format!("section `{name}` repeated")));
            }
            sections.insert(name.to_string(), Vec::new());
            current = Some(name.to_string());
            continue;
        }
        let Some(sec) = &current else {
            return Err(perr(no, first.0, "content before the first section header"));
        };
        sections.get_mut(sec).expect("current section exists").push(Line { no, toks, end });
    }
    let mut header = BTreeMap::new();
    for l in sections.get("site").map(Vec::as_slice).unwrap_or(&[]) {
        let (k, v) = l.key_value()?;
        if !["name", "kind", "group", "budget"].contains(&k.as_str()) {
            return Err(perr(l.no, l.toks[0].0, format!("unknown site key `{k}`")));
        }
        header.insert(k, (l.no, l.toks[2].0, v));
    }
    let mut flags = BTreeMap::new();
    for l in sections.get("flags").map(Vec::as_slice).unwrap_or(&[]) {
        let (k, v) = l.key_value()?;
        flags.insert(k, v);
    }
    let name = header
        .get("name")
        .map(|h| h.2.clone())
        .ok_or_else(|| perr(1, 1, "missing `name` in [site]"))?;
    let kind = header.get("kind").map(|h| h.2.as_str()).unwrap_or("table");
    let empty = Vec::new();
    let sec = |n: &str| sections.get(n).unwrap_or(&empty);
    let kind = match kind {
        "table" => {
            for n in ["rule"] {
                if let Some(l) = sec(n).first() {
                    return Err(perr(l.no, l.toks[0].0, "table sites take explicit [coverings]"));
                }
            }
            SiteKind::Table(table_site(sec("objects"), sec("morphisms"), sec("identities"), sec("compose"), sec("coverings"))?)
        }
        "gset" => {
            for n in ["objects", "morphisms", "identities", "compose", "coverings"] {
                if let Some(l) = sec(n).first() {
                    return Err(perr(l.no, l.toks[0].0, format!("generated sites have no [{n}] section")));
                }
            }
            SiteKind::GSet(gset_site(&header, sec("rule"))?)
        }
        other => {
            let h = &header["kind"];
            return Err(perr(h.0, h.1, format!("unknown kind `{other}`")));
        }
    };
    let depth = match flags.get("depth") {
        None => None,
        Some(v) => Some(v.parse::<usize>().map_err(|_| Error::Malformed(format!("flag depth = {v} is not a count")))?),
    };
    let kind = match (kind, depth) {
        (SiteKind::Table(s), Some(d)) => SiteKind::Table(s.with_depth(d)),
        (SiteKind::GSet(s), Some(d)) => SiteKind::GSet(s.with_depth(d)),
        (k, None) => k,
    };
    Ok(LoadedSite {
        name,
        origin: origin.to_string(),
        text: text.to_string(),
        kind,
        flags,
    })
}

fn table_site(
    objects: &[Line],
    morphisms: &[Line],
    identities: &[Line],
    compose: &[Line],
    coverings: &[Line],
) -> Result<SiteSpec<TableCategory>> {
    let mut b = TableCategoryBuilder::new();
    let mut objs: Vec<&str> = Vec::new();
    for l in objects {
        for &(col, t) in &l.toks {
            if objs.contains(&t) {
                return Err(perr(l.no, col, format!("object {t} declared twice")));
            }
            objs.push(t);
            b.object(t);
        }
    }
    if objs.is_empty() {
        return Err(perr(1, 1, "table site needs [objects]"));
    }
    let mut ends: BTreeMap<String, (String, String)> = BTreeMap::new();
    let unknown_obj = |l: &Line, i: usize| -> Result<String> {
        let (col, t) = l.toks[i];
        if !objs.contains(&t) {
            return Err(perr(l.no, col, format!("unknown object {t}")));
        }
        Ok(t.to_string())
    };
    for l in identities {
        let shape = "object = name";
        l.expect_len(3, shape)?;
        l.expect_sym(1, "=", shape)?;
        let o = unknown_obj(l, 0)?;
        b.identity(&o, l.toks[2].1);
        ends.insert(l.toks[2].1.to_string(), (o.clone(), o));
    }
    for o in &objs {
        if !identities.iter().any(|l| l.toks[0].1 == *o) {
            ends.insert(format!("id_{o}"), (o.to_string(), o.to_string()));
        }
    }
    for l in morphisms {
        let shape = "name : source -> target";
        l.expect_len(5, shape)?;
        l.expect_sym(1, ":", shape)?;
        l.expect_sym(3, "->", shape)?;
        let (s, d) = (unknown_obj(l, 2)?, unknown_obj(l, 4)?);
        let name = l.toks[0].1;
        if ends.contains_key(name) {
            return Err(perr(l.no, l.toks[0].0, format!("morphism {name} declared twice")));
        }
        b.morphism(name, &s, &d);
        ends.insert(name.to_string(), (s, d));
    }
    let mut seen = BTreeMap::new();
    for l in compose {
        let shape = "g . f = h";
        l.expect_len(5, shape)?;
        l.expect_sym(1, ".", shape)?;
        l.expect_sym(3, "=", shape)?;
        let mut e = Vec::new();
        for i in [0, 2, 4] {
            let (col, t) = l.toks[i];
            e.push(ends.get(t).cloned().ok_or_else(|| perr(l.no, col, format!("unknown morphism {t}")))?);
        }
        let (g, f, h) = (&e[0], &e[1], &e[2]);
        if f.1 != g.0 {
            return Err(perr(l.no, l.toks[0].0, format!("{} . {} does not compose", l.toks[0].1, l.toks[2].1)));
        }
        if h.0 != f.0 || h.1 != g.1 {
            return Err(perr(l.no, l.toks[4].0, format!("{} has the wrong endpoints for this composite", l.toks[4].1)));
        }
        let key = (l.toks[0].1, l.toks[2].1);
        if let Some(prev) = seen.insert(key, l.toks[4].1) {
            if prev != l.toks[4].1 {
                return Err(perr(l.no, l.toks[4].0, "composite defined twice"));
            }
        }
        b.compose(l.toks[0].1, l.toks[2].1, l.toks[4].1);
    }
    let cat = b.build()?;
    let mut fams = Vec::new();
    for l in coverings {
        if l.toks.len() < 2 || l.toks[1].1 != "<=" {
            return Err(perr(l.no, l.toks[0].0, "expected `target <= m1, m2, ...`"));
        }
        let target = unknown_obj(l, 0)?;
        let rest: Vec<(usize, &str)> = l.toks[2..].to_vec();
        let mut members = Vec::new();
        for (k, &(col, t)) in rest.iter().enumerate() {
            let name = t.strip_suffix(',').unwrap_or(t);
            if name.is_empty() || name.contains(',') || (k + 1 < rest.len() && !t.ends_with(',')) {
                return Err(perr(l.no, col, "members are separated by `, `"));
            }
            match ends.get(name) {
                None => return Err(perr(l.no, col, format!("unknown morphism {name}"))),
                Some((_, d)) if *d != target => return Err(perr(l.no, col, format!("{name} does not target {target}"))),
                Some(_) => members.push(name.to_string()),
            }
        }
        fams.push(CoveringFamily { target, members });
    }
    let laws = check_category_laws(&cat, cat.snapshot().len().max(1))?;
    if let Some(v) = laws.violations.first() {
        return Err(Error::LawViolation(v.clone()));
    }
    Ok(SiteSpec::new(cat, Basis::Explicit(fams)))
}

fn gset_site(header: &BTreeMap<String, (usize, usize, String)>, rule: &[Line]) -> Result<SiteSpec<GSetCategory>> {
    let group = match header.get("group") {
        None => return Err(perr(1, 1, "generated sites need `group`")),
        Some((no, col, v)) => {
            let parts: Vec<&str> = v.split(' ').collect();
            match parts.as_slice() {
                ["trivial"] => FiniteGroup::trivial(),
                ["s3"] => FiniteGroup::s3(),
                ["cyclic", n] => match n.parse::<usize>() {
                    Ok(n) if (1..=8).contains(&n) => FiniteGroup::cyclic(n),
                    _ => return Err(perr(*no, *col, "cyclic order must be in 1..=8")),
                },
                _ => return Err(perr(*no, *col, format!("unknown group `{v}`"))),
            }
        }
    };
    let budget = match header.get("budget") {
        None => 6,
        Some((no, col, v)) => v
            .parse::<usize>()
            .ok()
            .filter(|&b| b > 0)
            .ok_or_else(|| perr(*no, *col, "budget must be a positive count"))?,
    };
    let mut max_members = Some(2);
    match rule {
        [] => {}
        [l] => {
            if l.toks[0].1 != "jointly-surjective" {
                return Err(perr(l.no, l.toks[0].0, format!("unknown rule `{}`", l.toks[0].1)));
            }
            match l.toks.len() {
                1 => {}
                3 if l.toks[1].1 == "max" => {
                    let n = l.toks[2]
                        .1
                        .parse::<usize>()
                        .map_err(|_| perr(l.no, l.toks[2].0, "max must be a count"))?;
                    max_members = Some(n);
                }
                _ => return Err(perr(l.no, l.toks[1].0, "expected `jointly-surjective [max N]`")),
            }
        }
        [_, l, ..] => return Err(perr(l.no, l.toks[0].0, "one rule per site")),
    }
    let cat = GSetCategory::new(group, budget);
    Ok(SiteSpec::new(
        cat,
        Basis::Rule {
            name: "jointly-surjective".into(),
            max_members,
            accepts: jointly_surjective,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "[site]\nname = two\n[objects]\nA B\n[morphisms]\nf : A -> B\n";

    #[test]
    fn tokens_carry_columns() {
        assert_eq!(tokens("  ab  c"), vec![(3, "ab"), (7, "c")]);
        assert_eq!(tokens("∅ {1}"), vec![(1, "∅"), (3, "{1}")]);
    }

    #[test]
    fn small_table_site() {
        let s = parse_site(SMALL, "inline").unwrap();
        assert_eq!(s.name, "two");
        let SiteKind::Table(t) = &s.kind else { panic!("table expected") };
        assert_eq!(t.cat.hom(&"A".to_string(), &"B".to_string()).unwrap(), vec!["f".to_string()]);
    }

    #[test]
    fn errors_point_at_the_offending_token() {
        let bad = SMALL.replace("f : A -> B", "f : A -> C");
        match parse_site(&bad, "inline") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (6, 10)),
            other => panic!("{:?}", other.err()),
        }
        let bad = format!("{SMALL}g : B -> B\n[compose]\ng . g = f\n");
        match parse_site(&bad, "inline") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (9, 9)),
            other => panic!("{:?}", other.err()),
        }
        assert!(matches!(parse_site("x = 1", "inline"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_site("[bogus]", "inline"), Err(Error::Parse { line: 1, column: 2, .. })));
        let bad = SMALL.replace("[objects]", "[site]");
        assert!(matches!(parse_site(&bad, "inline"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn law_violations_are_reported() {
        // (e ∘ e) ∘ k = e but e ∘ (e ∘ k) = k
        let text = "[site]\nname = x\n[objects]\nA\n[morphisms]\ne : A -> A\nk : A -> A\n[compose]\ne . e = k\nk . k = e\ne . k = e\nk . e = k\n";
        match parse_site(text, "inline") {
            Err(Error::LawViolation(w)) => assert!(w.contains("associativity"), "{w}"),
            other => panic!("{:?}", other.err()),
        }
    }
}
