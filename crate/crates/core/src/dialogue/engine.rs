use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use super::policy::{PolicyConfig, PolicyEnsemble, PolicyPrediction};
use super::tracker::{Event, EventKind, Media, Tracker};
use crate::actions::{ActionError, ActionRegistry};
use crate::domain::{
    DomainSpec, SlotValue, ACTION_DEFAULT_FALLBACK, ACTION_LISTEN, ACTION_PAUSE, RESPONSE_DEFAULT, RESPONSE_WAKE,
};
use crate::nlu::{ClassifierModel, Interpreter, NluResult};

/// Upper bound on actions predicted within one turn.
pub const MAX_ACTIONS_PER_TURN: usize = 20;

const APOLOGY: &str = "Sorry, something went wrong while handling that. Please try again.";
const BUILTIN_DEFAULT: &str = "Sorry, I didn't get that.";
const BUILTIN_WAKE: &str = "I'm listening.";

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Wall-clock start time advanced by a monotonic timer.
#[derive(Debug, Clone)]
pub struct SystemClock {
    base_ms: u64,
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            base_ms: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
            start: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        self.base_ms + self.start.elapsed().as_millis() as u64
    }
}

/// Deterministic clock that advances by a fixed step on every reading.
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicU64,
    step: u64,
}

impl SteppingClock {
    pub fn new(start: u64, step: u64) -> Self {
        SteppingClock {
            next: AtomicU64::new(start),
            step,
        }
    }
}

impl Clock for SteppingClock {
    fn now_ms(&self) -> u64 {
        self.next.fetch_add(self.step, Ordering::Relaxed)
    }
}

/// Artificial latency injected per pipeline stage (benchmarking only).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageDelays {
    /// Before every NLU parse.
    pub nlu: Duration,
    /// Before every `utter_ask_*` / `utter_confirm_*` response.
    pub prompt: Duration,
    /// Inside every provider call (applied by the providers themselves).
    pub provider: Duration,
}

/// One rendered bot message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BotMessage {
    pub text: String,
    /// Response or action name that produced the message.
    pub response: String,
    pub media: Option<Media>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnOutcome {
    pub nlu: NluResult,
    pub messages: Vec<BotMessage>,
    /// Every prediction made in the turn, ending with `action_listen`.
    pub predictions: Vec<PolicyPrediction>,
}

impl TurnOutcome {
    /// Names of the executed actions, excluding the closing `action_listen`.
    pub fn actions(&self) -> Vec<&str> {
        self.predictions
            .iter()
            .map(|p| p.action.as_str())
            .filter(|a| *a != ACTION_LISTEN)
            .collect()
    }
}

pub fn is_prompt(response: &str) -> bool {
    response.starts_with("utter_ask_") || response.starts_with("utter_confirm_")
}

/// Trained model + spec + actions: the immutable, shareable part of the
/// assistant. Trackers are passed in per turn.
pub struct Engine {
    spec: Arc<DomainSpec>,
    interpreter: Interpreter,
    policy: PolicyEnsemble,
    actions: ActionRegistry,
    clock: Arc<dyn Clock>,
    delays: StageDelays,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("actions", &self.actions)
            .field("delays", &self.delays)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(spec: DomainSpec, model: ClassifierModel, actions: ActionRegistry) -> Self {
        let policy = PolicyEnsemble::new(&spec, PolicyConfig::default());
        Engine {
            interpreter: Interpreter::new(model, &spec),
            spec: Arc::new(spec),
            policy,
            actions,
            clock: Arc::new(SystemClock::default()),
            delays: StageDelays::default(),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_delays(mut self, delays: StageDelays) -> Self {
        self.delays = delays;
        self
    }

    pub fn with_policy_config(mut self, config: PolicyConfig) -> Self {
        self.policy = PolicyEnsemble::new(&self.spec, config);
        self
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn interpreter(&self) -> &Interpreter {
        &self.interpreter
    }

    pub fn policy(&self) -> &PolicyEnsemble {
        &self.policy
    }

    pub fn actions(&self) -> &ActionRegistry {
        &self.actions
    }

    /// Custom actions declared by the spec without a registered implementation.
    pub fn unregistered_actions(&self) -> Vec<&str> {
        self.spec
            .custom_action_names
            .iter()
            .map(String::as_str)
            .filter(|a| !self.actions.contains(a))
            .collect()
    }

    pub fn new_tracker(&self, sender_id: &str) -> Tracker {
        Tracker::new(sender_id, &self.spec)
    }

    fn emit(&self, tracker: &mut Tracker, kind: EventKind) {
        let timestamp = self.clock.now_ms().max(tracker.last_timestamp());
        tracker
            .push(Event { timestamp, kind })
            .expect("timestamps are clamped to be non-decreasing");
    }

    fn say(&self, tracker: &mut Tracker, out: &mut Vec<BotMessage>, text: String, response: &str, media: Option<Media>) {
        self.emit(
            tracker,
            EventKind::BotUttered {
                text: text.clone(),
                response: response.to_string(),
                media: media.clone(),
            },
        );
        out.push(BotMessage {
            text,
            response: response.to_string(),
            media,
        });
    }

    /// Picks the next variant of a response (cycling by how often it was
    /// uttered before in this tracker) and fills `{slot}` placeholders.
    pub fn render(&self, tracker: &Tracker, response: &str) -> Option<String> {
        let def = self.spec.response(response)?;
        let uttered = tracker
            .events()
            .iter()
            .filter(|e| matches!(&e.kind, EventKind::BotUttered { response: r, .. } if r == response))
            .count();
        let template = &def.variants[uttered % def.variants.len()];
        Some(fill_template(template, tracker))
    }

    fn render_or(&self, tracker: &Tracker, response: &str, builtin: &str) -> String {
        self.render(tracker, response).unwrap_or_else(|| builtin.to_string())
    }

    /// Starts a fresh session and acknowledges the wake word.
    pub fn wake(&self, tracker: &mut Tracker) -> Vec<BotMessage> {
        let mut out = Vec::new();
        self.emit(tracker, EventKind::SessionStarted);
        self.emit(
            tracker,
            EventKind::ActionExecuted {
                action: RESPONSE_WAKE.to_string(),
            },
        );
        let text = self.render_or(tracker, RESPONSE_WAKE, BUILTIN_WAKE);
        self.say(tracker, &mut out, text, RESPONSE_WAKE, None);
        self.emit(
            tracker,
            EventKind::ActionExecuted {
                action: ACTION_LISTEN.to_string(),
            },
        );
        out
    }

    /// Runs one user turn to completion: NLU, slot auto-fill, then
    /// predict/execute until the policy returns `action_listen`.
    pub fn handle_turn(&self, tracker: &mut Tracker, text: &str) -> TurnOutcome {
        if !tracker.is_active() {
            self.emit(tracker, EventKind::SessionStarted);
        }
        if !self.delays.nlu.is_zero() {
            thread::sleep(self.delays.nlu);
        }
        let nlu = self.interpreter.parse(text);
        self.emit(
            tracker,
            EventKind::UserUttered {
                text: text.to_string(),
                nlu: nlu.clone(),
            },
        );
        for slot in &self.spec.slots {
            let Some(entity) = &slot.fill_from else { continue };
            if let Some(m) = nlu.entities.iter().find(|m| &m.entity == entity) {
                self.emit(
                    tracker,
                    EventKind::SlotSet {
                        slot: slot.name.clone(),
                        value: Some(SlotValue::from(m.value.as_str())),
                    },
                );
            }
        }

        let mut messages = Vec::new();
        let mut predictions = Vec::new();
        for _ in 0..MAX_ACTIONS_PER_TURN {
            let prediction = self.policy.predict(&self.spec, tracker, &nlu);
            tracing::debug!(action = %prediction.action, origin = %prediction.origin, "predicted");
            let action = prediction.action.clone();
            predictions.push(prediction);
            if action == ACTION_LISTEN {
                self.emit(tracker, EventKind::ActionExecuted { action });
                return TurnOutcome {
                    nlu,
                    messages,
                    predictions,
                };
            }
            if let Err(err) = self.execute(tracker, &action, &mut messages) {
                self.recover(tracker, err, &mut messages, &mut predictions);
                return TurnOutcome {
                    nlu,
                    messages,
                    predictions,
                };
            }
        }
        self.recover(
            tracker,
            ActionError::LoopGuard(MAX_ACTIONS_PER_TURN),
            &mut messages,
            &mut predictions,
        );
        TurnOutcome {
            nlu,
            messages,
            predictions,
        }
    }

    fn recover(
        &self,
        tracker: &mut Tracker,
        err: ActionError,
        messages: &mut Vec<BotMessage>,
        predictions: &mut Vec<PolicyPrediction>,
    ) {
        tracing::warn!(error = %err, sender = tracker.sender_id(), "action failed; falling back");
        self.emit(
            tracker,
            EventKind::ActionExecuted {
                action: ACTION_DEFAULT_FALLBACK.to_string(),
            },
        );
        self.say(tracker, messages, APOLOGY.to_string(), ACTION_DEFAULT_FALLBACK, None);
        self.emit(
            tracker,
            EventKind::ActionExecuted {
                action: ACTION_LISTEN.to_string(),
            },
        );
        let fallback = |action: &str| PolicyPrediction {
            action: action.to_string(),
            confidence: 1.0,
            origin: super::policy::PolicyOrigin::Fallback,
        };
        predictions.push(fallback(ACTION_DEFAULT_FALLBACK));
        predictions.push(fallback(ACTION_LISTEN));
    }

    fn execute(&self, tracker: &mut Tracker, action: &str, out: &mut Vec<BotMessage>) -> Result<(), ActionError> {
        match action {
            ACTION_DEFAULT_FALLBACK => {
                self.emit(tracker, EventKind::ActionExecuted { action: action.into() });
                let text = self.render_or(tracker, RESPONSE_DEFAULT, BUILTIN_DEFAULT);
                self.say(tracker, out, text, RESPONSE_DEFAULT, None);
            }
            ACTION_PAUSE => {
                self.emit(tracker, EventKind::ActionExecuted { action: action.into() });
                self.emit(tracker, EventKind::ConversationPaused);
            }
            _ if self.spec.response(action).is_some() => {
                if is_prompt(action) && !self.delays.prompt.is_zero() {
                    thread::sleep(self.delays.prompt);
                }
                self.emit(tracker, EventKind::ActionExecuted { action: action.into() });
                let text = self.render(tracker, action).unwrap_or_default();
                self.say(tracker, out, text, action, None);
            }
            _ => {
                let result = self.actions.dispatch(action, tracker, self.clock.now_ms())?;
                self.emit(tracker, EventKind::ActionExecuted { action: action.into() });
                for r in result.responses {
                    let label = r.label.unwrap_or_else(|| action.to_string());
                    self.say(tracker, out, r.text, &label, r.media);
                }
                for e in result.events {
                    self.emit(tracker, e);
                }
            }
        }
        Ok(())
    }
}

/// Replaces `{slot}` with the slot's current value (empty when unset).
pub fn fill_template(template: &str, tracker: &Tracker) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                if let Some(v) = tracker.slot(name) {
                    out.push_str(&v.to_string());
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
