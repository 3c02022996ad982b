//! Pass/fail check lists shared by the validators.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            valid: true,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        self.valid &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            witness,
        });
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(name, true, None);
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.push(name, false, Some(witness.into()));
    }

    /// Records `Ok` as a pass and `Err(e)` as a failure witnessed by `e`.
    pub fn record<T, E: std::fmt::Display>(&mut self, name: impl Into<String>, outcome: &std::result::Result<T, E>) {
        match outcome {
            Ok(_) => self.pass(name),
            Err(e) => self.fail(name, e.to_string()),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// The failed checks and their witnesses on one line.
    pub fn summary(&self) -> String {
        self.failures()
            .map(|c| match &c.witness {
                Some(w) => format!("{}: {w}", c.name),
                None => c.name.clone(),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
