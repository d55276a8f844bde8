//! Sheaf conditions on Z/2-sets: representables are sheaves, a constant
//! presheaf is not, and sheafification repairs it.

use prosite::fincat::Category;
use prosite::sheaf::{is_sheaf, sheafify, yoneda, Presheaf};
use prosite::workbench::{load_site, SiteKind};

fn main() -> prosite::Result<()> {
    let site = load_site("bg2")?;
    let SiteKind::GSet(s) = &site.kind else { unreachable!("bg2 is generated") };
    let c = &s.cat;
    let pt = c.point();
    println!("y(*) is a sheaf: {}", is_sheaf(s, &yoneda(c, &pt)?)?.verdict());
    let two = Presheaf::constant(c, 2)?;
    println!("constant 2 is a sheaf: {}", is_sheaf(s, &two)?.verdict());
    let sh = sheafify(s, &two)?;
    for x in c.snapshot() {
        println!("  sections over {}: {}", c.describe_obj(&x), sh.sheaf.card(&x)?);
    }
    println!("sheafification is a sheaf: {}", is_sheaf(s, &sh.sheaf)?.verdict());
    Ok(())
}
