//! Pro-objects over a chain: hom-sets are colimits of base hom-sets, and a
//! chain with a deepest stage is isomorphic to that stage.

use prosite::fincat::{Category, FiniteGroup, FiniteLimits, GSetCategory};
use prosite::pro::{hom_set, pro_isomorphism, ProCategory, ProObject};

fn main() -> prosite::Result<()> {
    let c = GSetCategory::new(FiniteGroup::cyclic(2), 6);
    let pc = ProCategory::with_standard_probes(c.clone(), 3)?;
    let g = c.free_orbit();
    let pt = c.point();
    let flat = ProObject::chain(&c, &[c.identity(&g)])?;
    let tip = ProObject::chain(&c, &[c.to_terminal(&g)?])?;
    let cg = pc.constant(&g);
    println!("Hom(G -> G, G) has {} elements", hom_set(&pc, &flat, &cg)?.len());
    println!("Hom(G -> *, *) has {} elements", hom_set(&pc, &tip, &pc.constant(&pt))?.len());
    println!("G -> G iso to G: {}", pro_isomorphism(&pc, &flat, &cg)?.is_some());
    println!("G -> * iso to G: {}", pro_isomorphism(&pc, &tip, &cg)?.is_some());
    println!("G -> * iso to *: {}", pro_isomorphism(&pc, &tip, &pc.constant(&pt))?.is_some());
    println!("{} probes", pc.probes().len());
    Ok(())
}
