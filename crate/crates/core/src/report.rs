//! Structured, deterministic verification reports.
//!
//! A report carries the resolved configuration, named result values, and a
//! list of named checks with exact rational values. Rendering is plain
//! structured text: human-diffable, machine-parseable, and byte-identical
//! across runs with the same config and seed (the duration line is the one
//! exception and is rendered last so it can be stripped).

use crate::ratio::{render, Rational};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    /// Space-free check name, e.g. `product.g*g=e`.
    pub name: String,
    pub pass: bool,
    /// Exact value the check computed, when it has one.
    pub value: Option<Rational>,
    /// Failure witness; only rendered when present.
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub pipeline: String,
    pub params: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub checks: Vec<CheckRecord>,
    pub duration: Option<Duration>,
}

impl Report {
    pub fn new(pipeline: impl Into<String>) -> Self {
        Report {
            pipeline: pipeline.into(),
            params: Vec::new(),
            results: Vec::new(),
            seed: None,
            checks: Vec::new(),
            duration: None,
        }
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn result(&mut self, key: impl Into<String>, value: impl ToString) {
        self.results.push((key.into(), value.to_string()));
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, value: Option<Rational>) {
        self.checks.push(CheckRecord { name: name.into(), pass, value, witness: None });
    }

    pub fn check_with_witness(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        value: Option<Rational>,
        witness: impl Into<String>,
    ) {
        self.checks.push(CheckRecord {
            name: name.into(),
            pass,
            value,
            witness: Some(witness.into()),
        });
    }

    /// Overall verdict: every check passed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Absorbs another report's checks under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: &Report) {
        for c in &other.checks {
            self.checks.push(CheckRecord {
                name: format!("{prefix}.{}", c.name),
                ..c.clone()
            });
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("pipeline: {}\n", self.pipeline));
        for (k, v) in &self.params {
            out.push_str(&format!("param {k} = {v}\n"));
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {seed}\n"));
        }
        for (k, v) in &self.results {
            out.push_str(&format!("result {k} = {v}\n"));
        }
        for c in &self.checks {
            let flag = if c.pass { "pass" } else { "FAIL" };
            out.push_str(&format!("check {flag} {}", c.name));
            if let Some(v) = &c.value {
                out.push_str(&format!(" value={}", render(v)));
            }
            if let Some(w) = &c.witness {
                out.push_str(&format!(" witness={w}"));
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        out.push_str(&format!(
            "verdict: {} checks={} failed={}\n",
            if self.pass() { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed
        ));
        if let Some(d) = self.duration {
            out.push_str(&format!("duration-ms: {}\n", d.as_millis()));
        }
        out
    }
}
