//! Čech cohomology of the covering G -> * with coefficients in fixed points
//! agrees with group cohomology from the bar resolution.

use prosite::cohom::{bar_oracle, cech_complex, cohomology, FixedPointModule, GModule};
use prosite::fincat::{FiniteGroup, FiniteLimits, GSetCategory};
use prosite::linalg::PresentedGroup;

fn main() -> prosite::Result<()> {
    let group = FiniteGroup::cyclic(2);
    let c = GSetCategory::new(group.clone(), 6);
    let m = GModule::trivial(group, PresentedGroup::free(1));
    let k = FixedPointModule { cat: &c, module: &m };
    let cx = cech_complex(&c, &k, &[c.to_terminal(&c.free_orbit())?], 4)?;
    for n in 0..=4 {
        println!("{}   bar: {}", cohomology(&cx, n)?, bar_oracle(&m, n).invariants);
    }
    Ok(())
}
