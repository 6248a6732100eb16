//! Bundled scenarios, one per failure mode plus a principle-drift run.

use crate::report::Report;
use crate::scenario::Scenario;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demo {
    pub name: &'static str,
    /// The label the report must carry. `PrincipleDrift` means a recorded trigger.
    pub target: &'static str,
    /// Where the behaviour is discussed.
    pub topic: &'static str,
    pub json: &'static str,
}

pub const DEMOS: [Demo; 7] = [
    Demo {
        name: "contradiction",
        target: "Contradiction",
        topic: "Failure modes / Contradiction",
        json: include_str!("../demos/contradiction.json"),
    },
    Demo {
        name: "incompleteness",
        target: "Incompleteness",
        topic: "Failure modes / Incompleteness",
        json: include_str!("../demos/incompleteness.json"),
    },
    Demo {
        name: "non-convergence",
        target: "NonConvergence",
        topic: "Failure modes / Non-Convergence",
        json: include_str!("../demos/non-convergence.json"),
    },
    Demo {
        name: "overfitting",
        target: "Overfitting",
        topic: "Failure modes / Overfitting and Underfitting",
        json: include_str!("../demos/overfitting.json"),
    },
    Demo {
        name: "underfitting",
        target: "Underfitting",
        topic: "Failure modes / Overfitting and Underfitting",
        json: include_str!("../demos/underfitting.json"),
    },
    Demo {
        name: "deadlock",
        target: "Deadlock",
        topic: "Failure modes / Structural Deadlock",
        json: include_str!("../demos/deadlock.json"),
    },
    Demo {
        name: "drift",
        target: "PrincipleDrift",
        topic: "Dynamics / Principle Drift",
        json: include_str!("../demos/drift.json"),
    },
];

pub fn find(name: &str) -> Option<&'static Demo> {
    let name = name.strip_prefix("demo_").unwrap_or(name);
    DEMOS.iter().find(|d| d.name == name || d.name.replace('-', "_") == name)
}

impl Demo {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let s = Scenario::from_json(self.json)?;
        s.validate()?;
        Ok(s)
    }

    /// The report shows the behaviour this demo exists for.
    pub fn shows_target(&self, report: &Report) -> bool {
        match self.target {
            "PrincipleDrift" => {
                !report.drift_triggers().is_empty()
                    && report
                        .drift
                        .as_ref()
                        .and_then(|d| d.get("replay_matches"))
                        .and_then(serde_json::Value::as_bool)
                        == Some(true)
            }
            label => report.label_count(label) > 0,
        }
    }
}

/// The `demos` table.
pub fn table() -> String {
    let mut out = format!("{:<17}{:<16}{}\n", "NAME", "TARGET", "TOPIC");
    for d in &DEMOS {
        out.push_str(&format!("{:<17}{:<16}{}\n", d.name, d.target, d.topic));
    }
    out
}
