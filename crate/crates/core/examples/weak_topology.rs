//! The weak topology on pro-objects: a distinguished covering, its member as
//! a pro-covering, and the equalizer lemma against every probe.

use prosite::fincat::{Category, FiniteLimits};
use prosite::protop::{equalizer_check, is_pro_covering, member_morphism, verify_weak_covering, weak_step, ProSite, Topology};
use prosite::workbench::{load_site, SiteKind};

fn main() -> prosite::Result<()> {
    let site = load_site("bg2")?;
    let SiteKind::GSet(s) = &site.kind else { unreachable!("bg2 is generated") };
    let ps = ProSite::new(s.clone(), Topology::Weak, 3)?;
    let c = &ps.base.cat;
    let pt = ps.pro.constant(&c.point());
    let d = weak_step(&ps, &pt, &c.to_terminal(&c.free_orbit())?)?;
    println!("covering of * by G verifies: {}", verify_weak_covering(&ps, &d)?.is_none());
    let f = member_morphism(&ps, &d, 0)?;
    println!("member is a pro-covering: {:?}", matches!(is_pro_covering(&ps, &f, 2)?, prosite::protop::ProCovering::Yes(_)));
    for w in ps.pro.probes() {
        let r = equalizer_check(&ps, &f, w)?;
        println!("  equalizer at {}: {}", ps.pro.describe_obj(w), r.verdict());
    }
    Ok(())
}
