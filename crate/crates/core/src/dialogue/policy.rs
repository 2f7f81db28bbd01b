use std::fmt;

use serde::{Deserialize, Serialize};

use super::state::{story_turns, DialogueState, Turn};
use super::tracker::Tracker;
use crate::domain::{DomainSpec, ACTION_DEFAULT_FALLBACK, ACTION_LISTEN};
use crate::nlu::NluResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyOrigin {
    Rule,
    Memo,
    Fallback,
}

impl fmt::Display for PolicyOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyOrigin::Rule => "rule",
            PolicyOrigin::Memo => "memo",
            PolicyOrigin::Fallback => "fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyPrediction {
    pub action: String,
    pub confidence: f64,
    pub origin: PolicyOrigin,
}

impl PolicyPrediction {
    fn new(action: impl Into<String>, confidence: f64, origin: PolicyOrigin) -> Self {
        PolicyPrediction {
            action: action.into(),
            confidence,
            origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyConfig {
    /// Turns of history the memoization policy matches against.
    pub max_history: usize,
    /// Deny answers tolerated within one flow before giving up.
    pub max_denials: usize,
    pub deny_intent: String,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            max_history: 5,
            max_denials: 3,
            deny_intent: "deny".to_string(),
        }
    }
}

/// Next step of the rule triggered by the current intent, if that rule is
/// still mid-sequence.
pub fn rule_policy(spec: &DomainSpec, state: &DialogueState) -> Option<PolicyPrediction> {
    let turn = state.current()?;
    let rule = spec.rule_for(&turn.intent)?;
    let done = turn.actions.len();
    if done < rule.then.len() && rule.then[..done] == turn.actions[..] {
        Some(PolicyPrediction::new(&rule.then[done], 1.0, PolicyOrigin::Rule))
    } else {
        None
    }
}

/// Story memoization over pre-split story turns.
#[derive(Debug, Clone)]
pub struct StoryIndex {
    stories: Vec<Vec<Turn>>,
}

impl StoryIndex {
    pub fn new(spec: &DomainSpec) -> Self {
        StoryIndex {
            stories: spec.stories.iter().map(|s| story_turns(&s.steps)).collect(),
        }
    }

    /// Matches the longest tail of `turns` that occurs in some story, where
    /// completed turns must match exactly and the turn in progress must be
    /// a prefix of the story turn. Returns the next action, or `None` when
    /// nothing matches or the matching windows disagree.
    pub fn lookup(&self, turns: &[Turn]) -> Option<String> {
        for n in (1..=turns.len()).rev() {
            let tail = &turns[turns.len() - n..];
            let mut next: Option<&str> = None;
            let mut ambiguous = false;
            for story in &self.stories {
                for end in n - 1..story.len() {
                    let window = &story[end + 1 - n..=end];
                    if let Some(action) = match_window(tail, window) {
                        match next {
                            None => next = Some(action),
                            Some(prev) if prev != action => ambiguous = true,
                            _ => {}
                        }
                    }
                }
            }
            if ambiguous {
                return None;
            }
            if let Some(action) = next {
                return Some(action.to_string());
            }
        }
        None
    }
}

fn match_window<'a>(tail: &[Turn], window: &'a [Turn]) -> Option<&'a str> {
    let (current, done) = tail.split_last()?;
    let (story_current, story_done) = window.split_last()?;
    if done != story_done {
        return None;
    }
    if current.intent != story_current.intent || current.entities != story_current.entities {
        return None;
    }
    let k = current.actions.len();
    if k > story_current.actions.len() || story_current.actions[..k] != current.actions[..] {
        return None;
    }
    Some(story_current.actions.get(k).map(String::as_str).unwrap_or(ACTION_LISTEN))
}

pub fn memo_policy(spec: &DomainSpec, state: &DialogueState) -> Option<PolicyPrediction> {
    StoryIndex::new(spec)
        .lookup(&state.turns)
        .map(|a| PolicyPrediction::new(a, 1.0, PolicyOrigin::Memo))
}

/// Rule > memo > fallback ensemble.
#[derive(Debug, Clone)]
pub struct PolicyEnsemble {
    config: PolicyConfig,
    stories: StoryIndex,
}

impl PolicyEnsemble {
    pub fn new(spec: &DomainSpec, config: PolicyConfig) -> Self {
        PolicyEnsemble {
            stories: StoryIndex::new(spec),
            config,
        }
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn state(&self, spec: &DomainSpec, tracker: &Tracker) -> DialogueState {
        DialogueState::from_tracker(spec, tracker, self.config.max_history, &self.config.deny_intent)
    }

    pub fn predict(&self, spec: &DomainSpec, tracker: &Tracker, nlu: &NluResult) -> PolicyPrediction {
        let state = self.state(spec, tracker);
        let acted = state.current().is_some_and(|t| !t.actions.is_empty());
        let nlu_confidence = nlu.top().map(|t| t.confidence).unwrap_or(0.0);
        let fallback = |conf: f64| {
            if acted {
                PolicyPrediction::new(ACTION_LISTEN, 1.0, PolicyOrigin::Fallback)
            } else {
                PolicyPrediction::new(ACTION_DEFAULT_FALLBACK, conf, PolicyOrigin::Fallback)
            }
        };

        if nlu.is_fallback {
            return fallback(1.0 - nlu_confidence);
        }
        if let Some(p) = rule_policy(spec, &state) {
            return p;
        }
        if let Some(turn) = state.current() {
            if spec.rule_for(&turn.intent).is_some() && acted {
                return PolicyPrediction::new(ACTION_LISTEN, 1.0, PolicyOrigin::Rule);
            }
        }
        if !acted && state.denials > self.config.max_denials {
            return fallback(1.0);
        }
        match self.stories.lookup(&state.turns) {
            Some(a) => PolicyPrediction::new(a, 1.0, PolicyOrigin::Memo),
            None => fallback(nlu_confidence),
        }
    }
}

/// Single-shot prediction with default policy settings.
pub fn predict(spec: &DomainSpec, tracker: &Tracker, nlu: &NluResult) -> PolicyPrediction {
    PolicyEnsemble::new(spec, PolicyConfig::default()).predict(spec, tracker, nlu)
}
