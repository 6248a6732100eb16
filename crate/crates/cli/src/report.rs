//! The diagnostic report written by `run` and `demo`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::{Check, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initial,
    /// Re-run after drift changed the principle system.
    PostDrift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub phase: Phase,
    pub pass: bool,
    pub summary: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool_version: String,
    pub scenario: String,
    pub system: String,
    pub seed: u64,
    pub n_samples: usize,
    /// Unix seconds; absent under `--no-timestamp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<Value>,
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Value>,
    /// Samples carrying each failure label in the first labelled check.
    pub label_counts: BTreeMap<String, usize>,
    pub pass: bool,
    pub exit_code: i32,
}

impl Report {
    pub fn new(scenario: &str, system: &str, seed: u64, n_samples: usize) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.to_string(),
            system: system.to_string(),
            seed,
            n_samples,
            timestamp: None,
            adaptation: None,
            checks: Vec::new(),
            iterate: None,
            drift: None,
            label_counts: BTreeMap::new(),
            pass: true,
            exit_code: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("report: {e}")))
    }

    pub fn check(&self, check: Check, phase: Phase) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == check && c.phase == phase)
    }

    pub fn label_count(&self, label: &str) -> usize {
        self.label_counts.get(label).copied().unwrap_or(0)
    }

    pub fn drift_triggers(&self) -> &[Value] {
        self.drift
            .as_ref()
            .and_then(|d| d.get("triggers"))
            .and_then(Value::as_array)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {} ({} system, seed {}, n = {})",
            if self.scenario.is_empty() { "<unnamed>" } else { &self.scenario },
            self.system,
            self.seed,
            self.n_samples
        );
        if let Some(a) = &self.adaptation {
            let mode = a.get("response_mode").and_then(Value::as_str).unwrap_or("?");
            let epochs = a.get("epochs").and_then(Value::as_array).map_or(0, Vec::len);
            let _ = writeln!(out, "  adaptation: {epochs} epoch(s), response mode {mode}");
        }
        for c in &self.checks {
            let phase = match c.phase {
                Phase::Initial => "",
                Phase::PostDrift => " (after drift)",
            };
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "  {:<13}{verdict}  {}{phase}", c.check.name(), c.summary);
        }
        if let Some(it) = &self.iterate {
            let outcome = it.get("outcome").map(Value::to_string).unwrap_or_default();
            let _ = writeln!(out, "  iterate: {outcome}");
        }
        if self.drift.is_some() {
            let triggers = self.drift_triggers();
            let _ = writeln!(out, "  drift: {} trigger(s)", triggers.len());
            for t in triggers {
                let _ = writeln!(
                    out,
                    "    {} {} at {}: {} {}",
                    t["index"], t["cause"], t["metric"], t["action"], t["principle"]
                );
            }
            if let Some(ok) = self.drift.as_ref().and_then(|d| d.get("replay_matches")) {
                let _ = writeln!(out, "    replay reproduces final principles: {ok}");
            }
        }
        if !self.label_counts.is_empty() {
            let labels: Vec<String> = self.label_counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
            let _ = writeln!(out, "  labels: {}", labels.join(", "));
        }
        let _ = writeln!(
            out,
            "result: {} (exit {})",
            if self.pass { "all checks pass" } else { "at least one check fails" },
            self.exit_code
        );
        out
    }
}
