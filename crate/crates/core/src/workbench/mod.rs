//! Fixture catalog, the `.site` format, suites and replayable reports.

mod format;
mod report;
mod suite;

pub use format::{parse_site, LoadedSite, SiteKind};
pub use report::{parse_report, replay, sha256_hex, ReplayMode, ReplayOutcome, Report};
pub use suite::{run_suite, SUITES};

use crate::{Error, Result};

/// A site file shipped with the crate.
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: [Fixture; 3] = [
    Fixture {
        name: "b2",
        summary: "subsets of {1,2} under inclusion; not admissible (coproducts are not disjoint)",
        text: include_str!("../../fixtures/b2.site"),
    },
    Fixture {
        name: "bg2",
        summary: "finite Z/2-sets, six snapshot objects, jointly surjective covers",
        text: include_str!("../../fixtures/bg2.site"),
    },
    Fixture {
        name: "bz3",
        summary: "finite Z/3-sets, five snapshot objects, jointly surjective covers",
        text: include_str!("../../fixtures/bz3.site"),
    },
];

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Reads `path` if it exists; otherwise resolves `fixture:<name>`, `<name>`
/// or `<name>.site` against the shipped fixtures.
pub fn load_site(path: &str) -> Result<LoadedSite> {
    let p = std::path::Path::new(path);
    if !path.starts_with("fixture:") && p.is_file() {
        let text = std::fs::read_to_string(p)?;
        return parse_site(&text, path);
    }
    let name = path.strip_prefix("fixture:").unwrap_or(path);
    let name = name.rsplit('/').next().unwrap_or(name);
    let name = name.strip_suffix(".site").unwrap_or(name);
    match fixture(name) {
        Some(f) => parse_site(f.text, &format!("fixture:{}", f.name)),
        None => Err(Error::Io(format!("{path}: no such file or fixture"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Category;

    #[test]
    fn fixtures_load() {
        let b2 = load_site("b2").unwrap();
        let SiteKind::Table(s) = &b2.kind else { panic!("b2 is a table site") };
        assert_eq!(s.cat.snapshot().len(), 4);
        let bg2 = load_site("bg2.site").unwrap();
        assert_eq!(bg2.origin, "fixture:bg2");
        let SiteKind::GSet(s) = &bg2.kind else { panic!("bg2 is generated") };
        assert_eq!(s.cat.snapshot().len(), 6);
        assert_eq!(bg2.flag_usize("chains", 0).unwrap(), 3);
        assert!(load_site("fixture:bz3").is_ok());
        assert!(matches!(load_site("nope"), Err(Error::Io(_))));
    }
}
