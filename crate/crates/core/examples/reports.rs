//! Run a suite, render its report, and replay it from the text alone.

use prosite::workbench::{load_site, replay, run_suite};

fn main() -> prosite::Result<()> {
    let site = load_site("bz3")?;
    let report = run_suite(&site, "towers", 7, 5)?;
    let text = report.render();
    print!("{text}");
    let outcome = replay(&text, None)?;
    println!("replay agrees: {}", outcome.agrees());
    Ok(())
}
