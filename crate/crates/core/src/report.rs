use std::time::Instant;

use serde::Serialize;

/// Outcome of one machine check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub check_id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub millis: u64,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Check {
    pub fn pass(id: impl Into<String>) -> Self {
        Check { check_id: id.into(), status: Status::Pass, witness: None, millis: 0 }
    }

    pub fn fail(id: impl Into<String>, witness: impl Into<String>) -> Self {
        Check { check_id: id.into(), status: Status::Fail, witness: Some(witness.into()), millis: 0 }
    }

    pub fn from_option(id: impl Into<String>, witness: Option<String>) -> Self {
        match witness {
            None => Check::pass(id),
            Some(w) => Check::fail(id, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.millis = start.elapsed().as_millis() as u64;
        self
    }
}

/// Ordered list of checks.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// Run `f` and record its witness (if any) under `id` with timing.
    pub fn run(&mut self, id: impl Into<String>, f: impl FnOnce() -> Option<String>) -> bool {
        let t = Instant::now();
        let c = Check::from_option(id, f()).timed(t);
        let ok = c.passed();
        self.checks.push(c);
        ok
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        for c in &mut self.checks {
            c.check_id = format!("{prefix}.{}", c.check_id);
        }
        self
    }

    pub fn find(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check_id == id)
    }
}
