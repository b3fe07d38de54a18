//! Pass/fail verdicts with witnesses, shared by the checkers.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub subject: String,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Report {
        Report { subject: subject.into(), verdicts: Vec::new() }
    }

    /// Records `name`; a `Some` witness marks a failure.
    pub fn record(&mut self, name: impl Into<String>, failure: Option<String>) {
        self.verdicts.push(Verdict { name: name.into(), pass: failure.is_none(), witness: failure });
    }

    pub fn flag(&mut self, name: impl Into<String>, pass: bool) {
        self.verdicts.push(Verdict { name: name.into(), pass, witness: None });
    }

    pub fn extend(&mut self, other: Report) {
        self.verdicts.extend(other.verdicts);
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn first_failure(&self) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| !v.pass)
    }
}
