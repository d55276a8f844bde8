//! Admissibility of the two shipped base sites: the subset lattice fails on
//! disjoint coproducts, the Z/2-sets pass.

use prosite::site::check_admissible;
use prosite::workbench::{load_site, SiteKind};
use prosite::Verdict;

fn main() -> prosite::Result<()> {
    for name in ["b2", "bg2"] {
        let site = load_site(name)?;
        let report = match &site.kind {
            SiteKind::Table(s) => check_admissible(s)?,
            SiteKind::GSet(s) => check_admissible(s)?,
        };
        println!("{name}: {}", report.verdict());
        for c in report.checks.iter().filter(|c| c.verdict == Verdict::Fail) {
            println!("  {} {}", c.id, c.details);
        }
    }
    Ok(())
}
