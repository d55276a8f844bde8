//! Line-oriented reports: `CHECK <id> <verdict> <details>` lines sorted by
//! id, then a footer with seed, budget and hashes.

use sha2::{Digest, Sha256};

use super::{load_site, run_suite};
use crate::verdict::{Check, Verdict};
use crate::{Error, Result};

const HEADER: &str = "# prosite report";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub suite: String,
    /// Path or `fixture:<name>` the site was loaded from.
    pub site: String,
    pub seed: u64,
    pub budget: usize,
    /// SHA-256 of the site text.
    pub fixture_hash: String,
    /// Sorted by id.
    pub checks: Vec<Check>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn clean(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Report {
    pub fn new(suite: &str, site: &str, seed: u64, budget: usize, fixture_hash: String, mut checks: Vec<Check>) -> Self {
        for c in &mut checks {
            c.id = c.id.split_whitespace().collect::<Vec<_>>().join("_");
            c.details = clean(&c.details);
        }
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        Report {
            suite: suite.to_string(),
            site: site.to_string(),
            seed,
            budget,
            fixture_hash,
            checks,
        }
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.checks.iter().filter(|c| c.verdict == v).count()
    }

    /// 0 exactly when no check failed.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.count(Verdict::Fail) > 0)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn verdict_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                if c.details.is_empty() {
                    format!("CHECK {} {}", c.id, c.verdict)
                } else {
                    format!("CHECK {} {} {}", c.id, c.verdict, c.details)
                }
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut body = format!("{HEADER}\nSUITE {}\nSITE {}\n", self.suite, self.site);
        for l in self.verdict_lines() {
            body.push_str(&l);
            body.push('\n');
        }
        body.push_str(&format!(
            "SUMMARY pass={} fail={} unverified={}\nSEED {}\nBUDGET {}\nFIXTURE-SHA256 {}\n",
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Unverified),
            self.seed,
            self.budget,
            self.fixture_hash
        ));
        let h = sha256_hex(body.as_bytes());
        body.push_str(&format!("BODY-SHA256 {h}\n"));
        body
    }
}

fn malformed(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: msg.to_string(),
    }
}

/// Parses a rendered report and checks its body hash.
pub fn parse_report(text: &str) -> Result<Report> {
    let Some(cut) = text.rfind("BODY-SHA256 ") else {
        return Err(malformed(text.lines().count().max(1), "missing BODY-SHA256 footer"));
    };
    let (body, footer) = text.split_at(cut);
    let claimed = footer["BODY-SHA256 ".len()..].trim();
    let actual = sha256_hex(body.as_bytes());
    if claimed != actual {
        return Err(Error::HashMismatch(format!("report body hashes to {actual}, footer says {claimed}")));
    }
    let mut suite = None;
    let mut site = None;
    let mut seed = None;
    let mut budget = None;
    let mut hash = None;
    let mut checks = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let no = i + 1;
        if line == HEADER || line.is_empty() {
            continue;
        }
        let (tag, rest) = line.split_once(' ').ok_or_else(|| malformed(no, "expected `TAG value`"))?;
        match tag {
            "SUITE" => suite = Some(rest.to_string()),
            "SITE" => site = Some(rest.to_string()),
            "SEED" => seed = Some(rest.parse().map_err(|_| malformed(no, "seed is not a number"))?),
            "BUDGET" => budget = Some(rest.parse().map_err(|_| malformed(no, "budget is not a number"))?),
            "FIXTURE-SHA256" => hash = Some(rest.to_string()),
            "SUMMARY" => {}
            "CHECK" => {
                let mut parts = rest.splitn(3, ' ');
                let id = parts.next().unwrap_or_default();
                let verdict = parts
                    .next()
                    .and_then(Verdict::parse)
                    .ok_or_else(|| malformed(no, "unknown verdict"))?;
                checks.push(Check::new(id, verdict, parts.next().unwrap_or_default()));
            }
            _ => return Err(malformed(no, "unknown line tag")),
        }
    }
    let need = |x: Option<String>, what: &str| x.ok_or_else(|| malformed(1, &format!("missing {what}")));
    Ok(Report {
        suite: need(suite, "SUITE")?,
        site: need(site, "SITE")?,
        seed: seed.ok_or_else(|| malformed(1, "missing SEED"))?,
        budget: budget.ok_or_else(|| malformed(1, "missing BUDGET"))?,
        fixture_hash: need(hash, "FIXTURE-SHA256")?,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayMode {
    /// Same seed and budget; verdict lines must match byte for byte.
    Exact,
    /// A different budget; the original lines must reappear, new ones may be added.
    Superset,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub original: Report,
    pub rerun: Report,
    pub mode: ReplayMode,
    /// Original verdict lines absent from the rerun.
    pub missing: Vec<String>,
    /// Rerun verdict lines absent from the original.
    pub added: Vec<String>,
}

impl ReplayOutcome {
    pub fn agrees(&self) -> bool {
        self.missing.is_empty() && (self.mode == ReplayMode::Superset || self.added.is_empty())
    }
}

/// Re-runs a report's suite on its site, after checking both hashes.
pub fn replay(text: &str, budget: Option<usize>) -> Result<ReplayOutcome> {
    let original = parse_report(text)?;
    let site = load_site(&original.site)?;
    let h = sha256_hex(site.text.as_bytes());
    if h != original.fixture_hash {
        return Err(Error::HashMismatch(format!("{} hashes to {h}, report says {}", original.site, original.fixture_hash)));
    }
    let b = budget.unwrap_or(original.budget);
    let rerun = run_suite(&site, &original.suite, original.seed, b)?;
    let old = original.verdict_lines();
    let new = rerun.verdict_lines();
    let missing = old.iter().filter(|l| !new.contains(l)).cloned().collect();
    let added = new.iter().filter(|l| !old.contains(l)).cloned().collect();
    Ok(ReplayOutcome {
        mode: if b == original.budget { ReplayMode::Exact } else { ReplayMode::Superset },
        original,
        rerun,
        missing,
        added,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::new(
            "demo",
            "fixture:b2",
            7,
            3,
            "00".into(),
            vec![Check::fail("z.last", "a\nb"), Check::pass("a.first", "")],
        )
    }

    #[test]
    fn render_parse_roundtrip() {
        let r = sample();
        assert_eq!(r.checks[0].id, "a.first");
        assert_eq!(r.checks[1].details, "a b");
        let text = r.render();
        assert!(text.contains("CHECK z.last FAIL a b\n"));
        assert_eq!(parse_report(&text).unwrap(), r);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn tampering_is_detected() {
        let text = sample().render().replace("FAIL a b", "PASS a b");
        assert!(matches!(parse_report(&text), Err(Error::HashMismatch(_))));
        assert!(matches!(parse_report("SUITE x\n"), Err(Error::Parse { .. })));
    }
}
