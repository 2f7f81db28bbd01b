use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, SlotValue};
use crate::nlu::NluResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Track,
    Route,
}

/// UI hint attached to a bot message (a track to play, a route to draw).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Media {
    pub kind: MediaKind,
    #[serde(rename = "ref")]
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    UserUttered {
        text: String,
        nlu: NluResult,
    },
    BotUttered {
        text: String,
        response: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        media: Option<Media>,
    },
    ActionExecuted {
        action: String,
    },
    SlotSet {
        slot: String,
        value: Option<SlotValue>,
    },
    SessionStarted,
    SessionEnded,
    ConversationPaused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Monotonic milliseconds.
    pub timestamp: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event timestamp {got} precedes last timestamp {last}")]
pub struct OrderingError {
    pub last: u64,
    pub got: u64,
}

/// Append-only event log for one conversation plus the state folded from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracker {
    sender_id: String,
    events: Vec<Event>,
    initial_slots: BTreeMap<String, SlotValue>,
    slots: BTreeMap<String, SlotValue>,
    active: bool,
    paused: bool,
}

impl Tracker {
    pub fn new(sender_id: impl Into<String>, spec: &DomainSpec) -> Self {
        let initial: BTreeMap<String, SlotValue> = spec
            .slots
            .iter()
            .filter_map(|s| s.initial.clone().map(|v| (s.name.clone(), v)))
            .collect();
        Self::with_initial_slots(sender_id, initial)
    }

    pub fn with_initial_slots(sender_id: impl Into<String>, initial: BTreeMap<String, SlotValue>) -> Self {
        Tracker {
            sender_id: sender_id.into(),
            events: Vec::new(),
            slots: initial.clone(),
            initial_slots: initial,
            active: false,
            paused: false,
        }
    }

    pub fn sender_id(&self) -> &str {
        &self.sender_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn slots(&self) -> &BTreeMap<String, SlotValue> {
        &self.slots
    }

    pub fn slot(&self, name: &str) -> Option<&SlotValue> {
        self.slots.get(name)
    }

    pub fn initial_slots(&self) -> &BTreeMap<String, SlotValue> {
        &self.initial_slots
    }

    /// A session has started and not ended.
    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Paused by `action_pause` since the last session start.
    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn last_timestamp(&self) -> u64 {
        self.events.last().map(|e| e.timestamp).unwrap_or(0)
    }

    pub fn latest_message(&self) -> Option<&NluResult> {
        self.events.iter().rev().find_map(|e| match &e.kind {
            EventKind::UserUttered { nlu, .. } => Some(nlu),
            _ => None,
        })
    }

    /// Appends an event in place.
    pub fn push(&mut self, event: Event) -> Result<(), OrderingError> {
        let last = self.last_timestamp();
        if event.timestamp < last {
            return Err(OrderingError {
                last,
                got: event.timestamp,
            });
        }
        match &event.kind {
            EventKind::SlotSet { slot, value } => match value {
                Some(v) => {
                    self.slots.insert(slot.clone(), v.clone());
                }
                None => {
                    self.slots.remove(slot);
                }
            },
            EventKind::SessionStarted => {
                self.active = true;
                self.paused = false;
            }
            EventKind::SessionEnded => self.active = false,
            EventKind::ConversationPaused => self.paused = true,
            _ => {}
        }
        self.events.push(event);
        Ok(())
    }

    /// Value-semantics append: returns a new tracker, leaving `self` untouched.
    pub fn apply_event(&self, event: Event) -> Result<Tracker, OrderingError> {
        let mut next = self.clone();
        next.push(event)?;
        Ok(next)
    }

    /// Rebuilds a tracker by replaying `events` in order.
    pub fn replay(
        sender_id: impl Into<String>,
        initial: BTreeMap<String, SlotValue>,
        events: impl IntoIterator<Item = Event>,
    ) -> Result<Tracker, OrderingError> {
        let mut t = Tracker::with_initial_slots(sender_id, initial);
        for e in events {
            t.push(e)?;
        }
        Ok(t)
    }

    /// Fresh tracker for the same sender with the same slot initials.
    pub fn reset(&self) -> Tracker {
        Tracker::with_initial_slots(self.sender_id.clone(), self.initial_slots.clone())
    }
}
