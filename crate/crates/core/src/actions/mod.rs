//! Custom actions: engine-external behaviour invoked by the dialogue core.
//! Actions see a read-only tracker snapshot and change conversation state
//! only through the events they return.

mod mock;
mod pack;
mod providers;
mod tasks;

use std::collections::BTreeMap;
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Duration;

pub use mock::{mock_registry, FixtureError, FixtureSet, MockMusic, MockNavigation, MockNews, MockPhone, MockWeather};
pub use pack::{build_vehicle_pack, vehicle_eval_set, vehicle_fixtures, vehicle_scripts, VEHICLE_WAKE_WORD};
pub use providers::{
    Compass, Contact, Day, Forecast, Headline, MusicProvider, NavigationProvider, NewsProvider, PhoneProvider,
    Place, ProviderError, ProviderRegistry, Route, Track, WeatherProvider, WeatherReport,
};
pub use tasks::{FetchNews, FetchWeather, Navigate, PlaceCall, PlayMusic, NEWS_PAGE_SIZE};

use crate::dialogue::{EventKind, Media, Tracker};

pub const DEFAULT_ACTION_TIMEOUT: Duration = Duration::from_secs(5);

/// Everything an action may look at.
#[derive(Debug, Clone)]
pub struct ActionContext {
    pub tracker: Tracker,
    pub providers: ProviderRegistry,
    /// Clock reading at dispatch, in milliseconds.
    pub now_ms: u64,
}

impl ActionContext {
    pub fn slot_text(&self, name: &str) -> Option<&str> {
        self.tracker.slot(name).and_then(|v| v.as_text())
    }
}

/// One message produced by an action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionResponse {
    pub text: String,
    pub media: Option<Media>,
    /// Name recorded on the `BotUttered` event; defaults to the action name.
    pub label: Option<String>,
}

impl ActionResponse {
    pub fn text(text: impl Into<String>) -> Self {
        ActionResponse {
            text: text.into(),
            media: None,
            label: None,
        }
    }

    pub fn with_media(mut self, media: Media) -> Self {
        self.media = Some(media);
        self
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionResult {
    pub responses: Vec<ActionResponse>,
    /// Events to append after the action runs (slot changes only, in practice).
    pub events: Vec<EventKind>,
}

impl ActionResult {
    pub fn say(mut self, response: ActionResponse) -> Self {
        self.responses.push(response);
        self
    }

    pub fn set_slot(mut self, slot: &str, value: Option<&str>) -> Self {
        self.events.push(EventKind::SlotSet {
            slot: slot.to_string(),
            value: value.map(Into::into),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("no implementation registered for `{0}`")]
    Unknown(String),
    #[error("action `{0}` timed out after {1:?}")]
    Timeout(String, Duration),
    #[error("action `{0}` failed: {1}")]
    Failed(String, String),
    #[error("turn exceeded {0} actions without returning to listen")]
    LoopGuard(usize),
}

pub trait CustomAction: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError>;
}

/// Name → implementation map plus the providers handed to every call.
#[derive(Clone)]
pub struct ActionRegistry {
    actions: BTreeMap<String, Arc<dyn CustomAction>>,
    providers: ProviderRegistry,
    timeout: Duration,
}

impl std::fmt::Debug for ActionRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ActionRegistry")
            .field("actions", &self.actions.keys().collect::<Vec<_>>())
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl ActionRegistry {
    pub fn new(providers: ProviderRegistry) -> Self {
        ActionRegistry {
            actions: BTreeMap::new(),
            providers,
            timeout: DEFAULT_ACTION_TIMEOUT,
        }
    }

    /// Registry with the five vehicle actions.
    pub fn vehicle(providers: ProviderRegistry) -> Self {
        let mut r = ActionRegistry::new(providers);
        r.register(FetchNews);
        r.register(FetchWeather);
        r.register(Navigate);
        r.register(PlayMusic);
        r.register(PlaceCall);
        r
    }

    pub fn register(&mut self, action: impl CustomAction + 'static) {
        self.actions.insert(action.name().to_string(), Arc::new(action));
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn providers(&self) -> &ProviderRegistry {
        &self.providers
    }

    pub fn contains(&self, name: &str) -> bool {
        self.actions.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }

    /// Runs an action on a worker thread, abandoning it after the timeout.
    pub fn dispatch(&self, name: &str, tracker: &Tracker, now_ms: u64) -> Result<ActionResult, ActionError> {
        let action = self
            .actions
            .get(name)
            .cloned()
            .ok_or_else(|| ActionError::Unknown(name.to_string()))?;
        let ctx = ActionContext {
            tracker: tracker.clone(),
            providers: self.providers.clone(),
            now_ms,
        };
        let (tx, rx) = mpsc::sync_channel(1);
        let worker = thread::Builder::new()
            .name(format!("action-{name}"))
            .spawn(move || {
                let _ = tx.send(action.run(&ctx));
            })
            .map_err(|e| ActionError::Failed(name.to_string(), e.to_string()))?;
        match rx.recv_timeout(self.timeout) {
            Ok(result) => {
                let _ = worker.join();
                result
            }
            Err(mpsc::RecvTimeoutError::Timeout) => Err(ActionError::Timeout(name.to_string(), self.timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                Err(ActionError::Failed(name.to_string(), "action panicked".to_string()))
            }
        }
    }
}
