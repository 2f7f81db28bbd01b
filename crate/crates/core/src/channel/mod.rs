//! Channel-facing gateway: wire records, wake-word session gating, the
//! interactive terminal loop and the speech adapter seam.

mod repl;
mod speech;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use repl::{run_repl, ReplCommand};
pub use speech::{transcript_or_empty, PassthroughSpeech, SpeechAdapter, TranscriptionError, VoiceProperties};

use crate::dialogue::{BotMessage, Engine, Lease, Media, StoreError, Ticket, TrackerStore, TurnOutcome};

/// Inbound webhook record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMessage {
    pub sender: String,
    pub message: String,
}

/// Outbound webhook record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BotResponse {
    pub recipient_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<Media>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WakeState {
    Dormant,
    Listening,
}

/// True iff some whitespace token equals the wake word, ignoring case.
pub fn detect_wake(message: &str, wake_word: &str) -> bool {
    let wake = wake_word.trim().to_lowercase();
    !wake.is_empty() && message.split_whitespace().any(|t| t.to_lowercase() == wake)
}

/// What happened to one inbound message.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    /// The wake word (re)started the session.
    Woke(Vec<BotMessage>),
    /// The sender is dormant; the message was dropped.
    Ignored,
    /// A full dialogue turn ran.
    Turn(TurnOutcome),
}

impl Reply {
    pub fn messages(&self) -> &[BotMessage] {
        match self {
            Reply::Woke(m) => m,
            Reply::Ignored => &[],
            Reply::Turn(t) => &t.messages,
        }
    }
}

/// Engine + tracker store + wake word: everything a channel needs.
#[derive(Debug, Clone)]
pub struct Assistant {
    engine: Arc<Engine>,
    store: TrackerStore,
    wake_word: String,
}

impl Assistant {
    pub fn new(engine: Arc<Engine>, store: TrackerStore, wake_word: impl Into<String>) -> Self {
        Assistant {
            engine,
            store,
            wake_word: wake_word.into(),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn store(&self) -> &TrackerStore {
        &self.store
    }

    pub fn wake_word(&self) -> &str {
        &self.wake_word
    }

    pub fn wake_state(&self, sender: &str) -> Result<WakeState, StoreError> {
        let t = self.store.snapshot(sender)?;
        Ok(if t.is_active() && !t.is_paused() {
            WakeState::Listening
        } else {
            WakeState::Dormant
        })
    }

    /// Reserves the sender's next turn without blocking.
    pub fn ticket(&self, sender: &str) -> Ticket {
        self.store.ticket(sender)
    }

    /// Applies wake gating and runs the turn on an already-leased tracker.
    pub fn process(&self, lease: &mut Lease, message: &str) -> Reply {
        let tracker = lease.tracker_mut();
        if detect_wake(message, &self.wake_word) {
            return Reply::Woke(self.engine.wake(tracker));
        }
        if !tracker.is_active() || tracker.is_paused() {
            return Reply::Ignored;
        }
        Reply::Turn(self.engine.handle_turn(tracker, message))
    }

    /// Waits for the sender's turn, processes `message` and persists.
    pub fn respond(&self, sender: &str, message: &str) -> Result<(Reply, Vec<BotResponse>), StoreError> {
        self.respond_with_ticket(self.store.ticket(sender), message)
    }

    pub fn respond_with_ticket(&self, ticket: Ticket, message: &str) -> Result<(Reply, Vec<BotResponse>), StoreError> {
        let sender = ticket.sender().to_string();
        let mut lease = ticket.wait()?;
        let reply = self.process(&mut lease, message);
        lease.commit()?;
        let responses = to_responses(&sender, reply.messages());
        Ok((reply, responses))
    }

    pub fn handle(&self, sender: &str, message: &str) -> Result<Vec<BotResponse>, StoreError> {
        Ok(self.respond(sender, message)?.1)
    }

    /// Clears the sender's conversation and leaves them listening.
    pub fn reset(&self, sender: &str) -> Result<(), StoreError> {
        let mut lease = self.store.lease(sender)?;
        let fresh = lease.tracker().reset();
        lease.replace(fresh);
        self.engine.wake(lease.tracker_mut());
        lease.commit()
    }
}

pub fn to_responses(sender: &str, messages: &[BotMessage]) -> Vec<BotResponse> {
    messages
        .iter()
        .map(|m| BotResponse {
            recipient_id: sender.to_string(),
            text: m.text.clone(),
            media: m.media.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wake_word_is_a_whole_token() {
        assert!(detect_wake("coffee", "coffee"));
        assert!(detect_wake("COFFEE please", "coffee"));
        assert!(detect_wake("  hey\tCoffee ", "Coffee"));
        assert!(!detect_wake("coffeepot", "coffee"));
        assert!(!detect_wake("coffee.", "coffee"));
        assert!(!detect_wake("", "coffee"));
        assert!(!detect_wake("anything", ""));
    }

    #[test]
    fn response_media_is_omitted_when_absent() {
        let r = BotResponse {
            recipient_id: "u1".into(),
            text: "hi".into(),
            media: None,
        };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"recipient_id":"u1","text":"hi"}"#);
    }
}
