#![allow(dead_code)]

use std::sync::{Arc, OnceLock};
use std::time::Duration;

use assistant_core::actions::{build_vehicle_pack, mock_registry, vehicle_fixtures, ActionRegistry, VEHICLE_WAKE_WORD};
use assistant_core::channel::Assistant;
use assistant_core::dialogue::{Engine, EventKind, StageDelays, SteppingClock, Tracker, TrackerStore};
use assistant_core::domain::{parse_domain, DomainSpec, ACTION_LISTEN};
use assistant_core::nlu::{train, ClassifierModel};

/// The shipped pack and its trained model, trained once per test binary.
pub fn trained_pack() -> &'static (DomainSpec, ClassifierModel) {
    static PACK: OnceLock<(DomainSpec, ClassifierModel)> = OnceLock::new();
    PACK.get_or_init(|| {
        let spec = parse_domain(&build_vehicle_pack()).unwrap();
        let model = train(&spec, 0).unwrap();
        (spec, model)
    })
}

pub fn engine_with(delays: StageDelays) -> Engine {
    let (spec, model) = trained_pack().clone();
    let providers = mock_registry(&vehicle_fixtures(), delays.provider).unwrap();
    Engine::new(spec, model, ActionRegistry::vehicle(providers))
        .with_clock(Arc::new(SteppingClock::new(1_000, 1)))
        .with_delays(delays)
}

pub fn engine() -> Engine {
    engine_with(StageDelays::default())
}

pub fn assistant() -> Assistant {
    let engine = engine();
    let store = TrackerStore::in_memory(engine.spec());
    Assistant::new(Arc::new(engine), store, VEHICLE_WAKE_WORD)
}

/// Non-listen actions executed over the whole tracker.
pub fn executed(tracker: &Tracker) -> Vec<String> {
    tracker
        .events()
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::ActionExecuted { action } if action != ACTION_LISTEN => Some(action.clone()),
            _ => None,
        })
        .collect()
}

pub const NO_DELAY: Duration = Duration::ZERO;
