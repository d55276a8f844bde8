//! The P construction on the point of Z/2-sets stabilizes after one round at
//! the free orbit, which is weakly contractible.

use prosite::contract::{check_p_contractible, iterate_p};
use prosite::fincat::Category;
use prosite::protop::{ProSite, Topology};
use prosite::site::generate_k;
use prosite::workbench::{load_site, SiteKind};

fn main() -> prosite::Result<()> {
    let site = load_site("bg2")?;
    let SiteKind::GSet(s) = &site.kind else { unreachable!("bg2 is generated") };
    let ps = ProSite::new(s.clone(), Topology::Weak, 3)?;
    let k = generate_k(s)?;
    let u = ps.pro.constant(&s.cat.point());
    let rec = iterate_p(&ps, &u, &k, 3)?;
    println!("rounds {}, stabilized at {:?}", rec.iterations(), rec.stabilized_at);
    println!("result {}", ps.pro.describe_obj(&rec.result()));
    for c in check_p_contractible(&ps, &rec, &k)?.checks {
        println!("  {} {} {}", c.id, c.verdict, c.details);
    }
    Ok(())
}
