//! Command-line front end. Exit status: 0 without failures, 1 when a check
//! fails or a replay disagrees, 2 on errors.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prosite::workbench::{load_site, replay, run_suite, FIXTURES, SUITES};

#[derive(Parser)]
#[command(name = "prosite", version, about = "Check finite sites and pro-sites and replay reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite on a site file or shipped fixture and write a report.
    Check {
        file: String,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per randomized campaign.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-run the suite recorded in a report and compare verdicts.
    Replay {
        report: String,
        /// Rerun with a larger budget; the original verdicts must persist.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Shipped fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    List,
}

fn run(cli: Cli) -> prosite::Result<u8> {
    match cli.command {
        Command::Check { file, suite, seed, budget, out } => {
            let site = load_site(&file)?;
            let report = run_suite(&site, &suite, seed, budget)?;
            let text = report.render();
            match out {
                Some(path) => {
                    std::fs::write(&path, &text)?;
                    for line in report.verdict_lines().iter().filter(|l| !l.contains(" PASS")) {
                        println!("{line}");
                    }
                    println!(
                        "{} pass, {} fail, {} unverified; report written to {path}",
                        report.count(prosite::Verdict::Pass),
                        report.count(prosite::Verdict::Fail),
                        report.count(prosite::Verdict::Unverified)
                    );
                }
                None => print!("{text}"),
            }
            Ok(report.exit_code() as u8)
        }
        Command::Replay { report, budget } => {
            let text = std::fs::read_to_string(&report)?;
            let outcome = replay(&text, budget)?;
            for l in &outcome.missing {
                println!("missing: {l}");
            }
            for l in &outcome.added {
                println!("added: {l}");
            }
            let agrees = outcome.agrees();
            println!(
                "{}: {} original checks, {} rerun checks",
                if agrees { "agrees" } else { "disagrees" },
                outcome.original.checks.len(),
                outcome.rerun.checks.len()
            );
            Ok(if agrees { 0 } else { 1 })
        }
        Command::Fixtures { action: FixturesAction::List } => {
            for f in FIXTURES.iter() {
                println!("{:<6} {}", f.name, f.summary);
            }
            println!("suites: {}", SUITES.join(", "));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
