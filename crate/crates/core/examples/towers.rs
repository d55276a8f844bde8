//! A tower of covering epimorphisms over a contractible base splits, and the
//! section composes with the tower to the identity.

use prosite::fincat::Category;
use prosite::site::SiteSpec;
use prosite::tower::{lift_oracle, split_tower_over_contractible, transfinite_composition, Marker, Tower};
use prosite::workbench::{load_site, SiteKind};

fn main() -> prosite::Result<()> {
    let site = load_site("bg2")?;
    let SiteKind::GSet(s) = &site.kind else { unreachable!("bg2 is generated") };
    let c = &s.cat;
    let g = c.free_orbit();
    let steps = tower_steps(s, &g, 4)?;
    let n = steps.len();
    let t = Tower::new(c, g.clone(), steps, vec![Marker::EPI.and(Marker::COVERING); n])?;
    let stages: Vec<String> = t.stages.iter().map(|x| c.describe_obj(x)).collect();
    println!("tower: {}", stages.join(" <- "));
    let sec = split_tower_over_contractible(c, &t, lift_oracle(c))?;
    println!("section {}", c.describe_mor(&sec));
    let back = c.compose(&transfinite_composition(c, &t)?, &sec)?;
    println!("composite is the identity: {}", back == c.identity(&g));
    Ok(())
}

/// The last covering morphism onto each stage, which for G is 2G -> G.
fn tower_steps(
    s: &SiteSpec<prosite::fincat::GSetCategory>,
    base: &prosite::fincat::GSet,
    len: usize,
) -> prosite::Result<Vec<prosite::fincat::GSetMap>> {
    let mut stage = base.clone();
    let mut steps = Vec::new();
    for _ in 0..len {
        let e = s.covering_morphisms_onto(&stage)?.pop().expect("identities cover");
        stage = s.cat.source(&e);
        steps.push(e);
    }
    Ok(steps)
}
