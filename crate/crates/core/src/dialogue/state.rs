use std::collections::{BTreeMap, BTreeSet};

use super::tracker::{EventKind, Tracker};
use crate::domain::{DomainSpec, Step, ACTION_LISTEN};

/// One user turn: the intent and entity names the user produced, followed by
/// every action the bot has executed since (excluding `action_listen`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Turn {
    pub intent: String,
    /// Sorted, deduplicated entity names.
    pub entities: Vec<String>,
    pub actions: Vec<String>,
}

impl Turn {
    pub fn new(intent: impl Into<String>, entities: &[&str]) -> Self {
        let mut entities: Vec<String> = entities.iter().map(|e| e.to_string()).collect();
        entities.sort();
        entities.dedup();
        Turn {
            intent: intent.into(),
            entities,
            actions: Vec::new(),
        }
    }
}

/// Featurized view of a tracker that the policies predict from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueState {
    /// Up to `max_history` most recent turns of the current session; the
    /// last one is the turn in progress.
    pub turns: Vec<Turn>,
    /// Declared slot name → whether it currently holds a value.
    pub slots_set: BTreeMap<String, bool>,
    /// Turns with the deny intent since the last turn that opened a story
    /// (including the turn in progress).
    pub denials: usize,
}

impl DialogueState {
    pub fn from_tracker(spec: &DomainSpec, tracker: &Tracker, max_history: usize, deny_intent: &str) -> Self {
        let openers = story_openers(spec);
        let mut turns: Vec<Turn> = Vec::new();
        let mut denials = 0;
        for event in tracker.events() {
            match &event.kind {
                EventKind::SessionStarted => {
                    turns.clear();
                    denials = 0;
                }
                EventKind::UserUttered { nlu, .. } => {
                    let turn = Turn::new(nlu.effective_intent(), &nlu.entity_names());
                    if openers.contains(turn.intent.as_str()) {
                        denials = 0;
                    }
                    if turn.intent == deny_intent {
                        denials += 1;
                    }
                    turns.push(turn);
                }
                EventKind::ActionExecuted { action } if action != ACTION_LISTEN => {
                    if let Some(current) = turns.last_mut() {
                        current.actions.push(action.clone());
                    }
                }
                _ => {}
            }
        }
        let skip = turns.len().saturating_sub(max_history);
        turns.drain(..skip);
        let slots_set = spec
            .slots
            .iter()
            .map(|s| (s.name.clone(), tracker.slot(&s.name).is_some()))
            .collect();
        DialogueState {
            turns,
            slots_set,
            denials,
        }
    }

    pub fn current(&self) -> Option<&Turn> {
        self.turns.last()
    }
}

/// Intents that begin at least one story.
pub fn story_openers(spec: &DomainSpec) -> BTreeSet<&str> {
    spec.stories
        .iter()
        .filter_map(|s| match s.steps.first() {
            Some(Step::User(u)) => Some(u.intent.as_str()),
            _ => None,
        })
        .collect()
}

/// A story rewritten as a list of turns.
pub fn story_turns(steps: &[Step]) -> Vec<Turn> {
    let mut turns: Vec<Turn> = Vec::new();
    for step in steps {
        match step {
            Step::User(u) => {
                let names: Vec<&str> = u.entities.iter().map(String::as_str).collect();
                turns.push(Turn::new(u.intent.clone(), &names));
            }
            Step::Bot(action) => {
                if let Some(t) = turns.last_mut() {
                    t.actions.push(action.clone());
                }
            }
        }
    }
    turns
}
