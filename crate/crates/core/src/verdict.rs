use std::fmt;

/// Three-valued outcome of a bounded check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    /// The check needed something outside the snapshot or budget.
    Unverified,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unverified => "UNVERIFIED",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        match s {
            "PASS" => Some(Verdict::Pass),
            "FAIL" => Some(Verdict::Fail),
            "UNVERIFIED" => Some(Verdict::Unverified),
            _ => None,
        }
    }

    /// Combine two verdicts: any failure dominates, then any unverified item.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Unverified, _) | (_, Unverified) => Unverified,
            _ => Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One named check with its verdict and a human-readable witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub verdict: Verdict,
    pub details: String,
}

impl Check {
    pub fn new(id: impl Into<String>, verdict: Verdict, details: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            verdict,
            details: details.into(),
        }
    }

    pub fn pass(id: impl Into<String>, details: impl Into<String>) -> Self {
        Self::new(id, Verdict::Pass, details)
    }

    pub fn fail(id: impl Into<String>, details: impl Into<String>) -> Self {
        Self::new(id, Verdict::Fail, details)
    }

    pub fn unverified(id: impl Into<String>, details: impl Into<String>) -> Self {
        Self::new(id, Verdict::Unverified, details)
    }

    pub fn from_bool(id: impl Into<String>, ok: bool, details: impl Into<String>) -> Self {
        Self::new(id, if ok { Verdict::Pass } else { Verdict::Fail }, details)
    }
}

/// A list of checks with an aggregate verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }

    pub fn verdict(&self) -> Verdict {
        self.checks
            .iter()
            .fold(Verdict::Pass, |acc, c| acc.and(c.verdict))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.failures().next()
    }

    /// Record a bounded check: a failure witness wins; otherwise the
    /// in-scope items pass and out-of-scope items get their own
    /// `<id>.outside` entry.
    pub fn push_scoped(&mut self, id: &str, failure: Option<String>, verified: usize, outside: usize) {
        match failure {
            Some(w) => self.push(Check::fail(id, w)),
            None if verified == 0 && outside > 0 => {
                self.push(Check::unverified(id, format!("{outside} items outside the snapshot")))
            }
            None => {
                self.push(Check::pass(id, format!("{verified} items verified")));
                if outside > 0 {
                    self.push(Check::unverified(
                        format!("{id}.outside"),
                        format!("{outside} items outside the snapshot"),
                    ));
                }
            }
        }
    }

    /// No failures, and every check not marked as outside scope passes.
    pub fn passes_within_budget(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.verdict == Verdict::Pass || (c.verdict == Verdict::Unverified && c.id.ends_with(".outside")))
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.checks.iter().filter(|c| c.verdict == v).count()
    }
}
