//! A composition table and a generated category of finite G-sets, with
//! their laws and a chosen pullback.

use prosite::fincat::{check_category_laws, Category, FiniteGroup, FiniteLimits, GSetCategory, TableCategoryBuilder};

fn main() -> prosite::Result<()> {
    // the walking idempotent: e ∘ e = e
    let idem = TableCategoryBuilder::new()
        .object("A")
        .morphism("e", "A", "A")
        .compose("e", "e", "e")
        .build()?;
    let laws = check_category_laws(&idem, 8)?;
    println!("idempotent: {} triples, {} violations", laws.triples_checked, laws.violations.len());

    let c = GSetCategory::new(FiniteGroup::cyclic(2), 6);
    let g = c.free_orbit();
    let to_pt = c.to_terminal(&g)?;
    let pb = c.pullback(&to_pt, &to_pt)?;
    println!("G x G over * is {}", c.describe_obj(&pb.apex));
    let snapshot: Vec<String> = c.snapshot().iter().map(|x| c.describe_obj(x)).collect();
    println!("snapshot: {}", snapshot.join(" "));
    Ok(())
}
