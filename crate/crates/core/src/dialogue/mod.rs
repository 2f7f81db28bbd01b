//! Conversation state and next-action prediction: the event-sourced
//! tracker, the rule > memo > fallback policy ensemble, the turn engine and
//! the per-sender tracker store.

mod engine;
mod policy;
mod state;
mod store;
mod tracker;

pub use engine::{
    fill_template, is_prompt, BotMessage, Clock, Engine, StageDelays, SteppingClock, SystemClock, TurnOutcome,
    MAX_ACTIONS_PER_TURN,
};
pub use policy::{
    memo_policy, predict, rule_policy, PolicyConfig, PolicyEnsemble, PolicyOrigin, PolicyPrediction, StoryIndex,
};
pub use state::{story_openers, story_turns, DialogueState, Turn};
pub use store::{Lease, StoreError, Ticket, TrackerStore};
pub use tracker::{Event, EventKind, Media, MediaKind, OrderingError, Tracker};
