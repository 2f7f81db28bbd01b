use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    TooFewExamples,
    UnreachableResponse,
    ShadowedStory,
    DuplicateExample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub name: String,
    pub message: String,
}

const MIN_EXAMPLES: usize = 3;

/// Non-fatal authoring issues in a valid spec.
pub fn lint_domain(spec: &DomainSpec) -> Vec<Warning> {
    let mut out = Vec::new();
    for intent in &spec.intents {
        if intent.examples.len() < MIN_EXAMPLES {
            out.push(Warning {
                kind: WarningKind::TooFewExamples,
                name: intent.name.clone(),
                message: format!(
                    "too few examples: intent `{}` has {} (want at least {MIN_EXAMPLES})",
                    intent.name,
                    intent.examples.len()
                ),
            });
        }
    }

    let used: BTreeSet<&str> = spec
        .stories
        .iter()
        .flat_map(|s| s.steps.iter())
        .filter_map(|step| match step {
            Step::Bot(a) => Some(a.as_str()),
            Step::User(_) => None,
        })
        .chain(spec.rules.iter().flat_map(|r| r.then.iter().map(String::as_str)))
        .chain(ENGINE_RESPONSES.iter().copied())
        .collect();
    for r in &spec.responses {
        if !used.contains(r.name.as_str()) {
            out.push(Warning {
                kind: WarningKind::UnreachableResponse,
                name: r.name.clone(),
                message: format!("unreachable response: `{}` is never used by a story or rule", r.name),
            });
        }
    }

    for story in &spec.stories {
        if let Some(Step::User(first)) = story.steps.first() {
            if let Some(rule) = spec.rule_for(&first.intent) {
                out.push(Warning {
                    kind: WarningKind::ShadowedStory,
                    name: story.name.clone(),
                    message: format!(
                        "story `{}` starts with `{}`, which rule `{}` always handles",
                        story.name, first.intent, rule.name
                    ),
                });
            }
        }
    }
    out
}
