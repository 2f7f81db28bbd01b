mod common;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use assistant_core::actions::{
    mock_registry, vehicle_fixtures, ActionContext, ActionError, ActionRegistry, ActionResult, CustomAction,
    Headline, NewsProvider, ProviderError,
};
use assistant_core::dialogue::{
    memo_policy, rule_policy, DialogueState, Engine, Event, EventKind, PolicyOrigin, SteppingClock, Tracker,
    MAX_ACTIONS_PER_TURN,
};
use assistant_core::domain::{parse_domain, DocumentSet, DomainSpec, SlotValue, Step, ACTION_DEFAULT_FALLBACK};
use assistant_core::nlu::{train, Interpreter};
use common::{engine, executed, trained_pack};

fn texts(outcome: &assistant_core::dialogue::TurnOutcome) -> Vec<&str> {
    outcome.messages.iter().map(|m| m.text.as_str()).collect()
}

/// A training example for `intent` whose extracted entity names are exactly
/// `entities`, and which the trained model classifies back to `intent`.
fn utterance_for(spec: &DomainSpec, nlu: &Interpreter, intent: &str, entities: &[String]) -> String {
    let mut want: Vec<&str> = entities.iter().map(String::as_str).collect();
    want.sort();
    spec.intent(intent)
        .unwrap()
        .examples
        .iter()
        .map(|e| e.text.clone())
        .find(|t| {
            let r = nlu.parse(t);
            r.effective_intent() == intent && r.entity_names() == want
        })
        .unwrap_or_else(|| panic!("no usable example for {intent} {entities:?}"))
}

#[test]
fn greet_is_answered_by_the_rule() {
    let e = engine();
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "hello");
    assert_eq!(out.actions(), ["utter_greet"]);
    assert_eq!(texts(&out), ["Hello! How can I help you on the road today?"]);
    assert_eq!(out.predictions[0].origin, PolicyOrigin::Rule);
    assert_eq!(out.predictions.last().unwrap().action, "action_listen");
    // Variants rotate.
    let out = e.handle_turn(&mut t, "hello");
    assert_eq!(texts(&out), ["Hi there! What can I do for you?"]);
}

#[test]
fn weather_request_asks_for_location() {
    let e = engine();
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "what's the weather");
    assert_eq!(texts(&out), ["Which location would you like the weather for?"]);
    assert_eq!(out.predictions[0].origin, PolicyOrigin::Memo);
}

#[test]
fn gibberish_falls_back() {
    let e = engine();
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "zzqx");
    assert!(out.nlu.is_fallback);
    assert_eq!(out.actions(), [ACTION_DEFAULT_FALLBACK]);
    assert_eq!(texts(&out), ["Sorry, I didn't get that. Could you say it again?"]);
    let out = e.handle_turn(&mut t, "");
    assert_eq!(out.actions(), [ACTION_DEFAULT_FALLBACK]);
}

#[test]
fn full_weather_flow() {
    let e = engine();
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "what's the weather");
    let out = e.handle_turn(&mut t, "Mumbai");
    assert_eq!(texts(&out), ["Did you say Mumbai?"]);
    assert_eq!(t.slot("location"), Some(&SlotValue::from("Mumbai")));
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(out.actions(), ["action_fetch_weather"]);
    assert_eq!(out.messages.len(), 2);
    assert!(out.messages[0].text.contains("31°C") && out.messages[0].text.contains("74% humidity"));
    assert!(out.messages[1].text.starts_with("Tomorrow in Mumbai"));
}

#[test]
fn inline_entity_skips_the_question() {
    let e = engine();
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "what's the weather in Delhi");
    assert_eq!(texts(&out), ["Did you say Delhi?"]);
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(out.messages.len(), 2);
    assert!(out.messages[1].text.starts_with("Tomorrow in Delhi"));
}

#[test]
fn every_story_is_reproduced() {
    let (spec, _) = trained_pack();
    let e = engine();
    for story in &spec.stories {
        let mut t = e.new_tracker(&story.name);
        let mut got = Vec::new();
        let mut want = Vec::new();
        for step in &story.steps {
            match step {
                Step::User(u) => {
                    let text = utterance_for(spec, e.interpreter(), &u.intent, &u.entities);
                    let out = e.handle_turn(&mut t, &text);
                    got.extend(out.actions().into_iter().map(String::from));
                }
                Step::Bot(a) => want.push(a.clone()),
            }
        }
        assert_eq!(got, want, "story {}", story.name);
    }
}

#[test]
fn deny_re_asks_then_gives_up() {
    let e = engine();
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "play some music");
    for _ in 0..3 {
        assert_eq!(e.handle_turn(&mut t, "Stan").actions(), ["utter_confirm_song"]);
        assert_eq!(e.handle_turn(&mut t, "no").actions(), ["utter_ask_song"]);
    }
    assert_eq!(e.handle_turn(&mut t, "Stan").actions(), ["utter_confirm_song"]);
    let out = e.handle_turn(&mut t, "no");
    assert_eq!(out.actions(), [ACTION_DEFAULT_FALLBACK]);
    assert_eq!(out.predictions[0].origin, PolicyOrigin::Fallback);
    // A new request starts a fresh flow with a fresh retry budget.
    assert_eq!(e.handle_turn(&mut t, "play some music").actions(), ["utter_ask_song"]);
    e.handle_turn(&mut t, "Stan");
    assert_eq!(e.handle_turn(&mut t, "no").actions(), ["utter_ask_song"]);
}

#[test]
fn news_pages_through_the_fixture() {
    let e = engine();
    let mut t = e.new_tracker("u");
    assert_eq!(e.handle_turn(&mut t, "what's the news").actions(), ["utter_confirm_news"]);
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(out.actions(), ["action_fetch_news"]);
    assert!(out.messages[0].text.contains("1. City council") && out.messages[0].text.contains("5. New highway"));
    assert!(!out.messages[0].text.contains("6. "));
    assert_eq!(out.messages[1].response, "utter_confirm_more_news");
    let out = e.handle_turn(&mut t, "yes");
    assert!(out.messages[0].text.contains("6. Scientists") && out.messages[0].text.contains("10. Local startup"));
    let out = e.handle_turn(&mut t, "no");
    assert_eq!(texts(&out), ["Okay."]);
}

#[test]
fn goodbye_pauses() {
    let e = engine();
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "goodbye");
    assert_eq!(out.actions(), ["utter_goodbye", "action_pause"]);
    assert!(t.is_paused());
    assert!(t.events().iter().any(|ev| ev.kind == EventKind::ConversationPaused));
}

#[test]
fn mid_rule_state_predicts_the_pause() {
    let (spec, _) = trained_pack();
    let e = engine();
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "goodbye");
    // Rebuild the tracker up to (and including) utter_goodbye.
    let cut = t
        .events()
        .iter()
        .position(|ev| matches!(&ev.kind, EventKind::BotUttered { response, .. } if response == "utter_goodbye"))
        .unwrap();
    let partial = Tracker::replay("u", BTreeMap::new(), t.events()[..=cut].to_vec()).unwrap();
    let state = DialogueState::from_tracker(spec, &partial, 5, "deny");
    let p = rule_policy(spec, &state).unwrap();
    assert_eq!((p.action.as_str(), p.confidence, p.origin), ("action_pause", 1.0, PolicyOrigin::Rule));
}

#[test]
fn memo_policy_traces_the_music_story() {
    let (spec, _) = trained_pack();
    let e = engine();
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "play some music");
    // Append the user turn without running the policy loop.
    let nlu = e.interpreter().parse("Stan");
    assert_eq!(nlu.effective_intent(), "inform_song");
    let ts = t.last_timestamp();
    t.push(Event {
        timestamp: ts,
        kind: EventKind::UserUttered {
            text: "Stan".into(),
            nlu,
        },
    })
    .unwrap();
    let state = DialogueState::from_tracker(spec, &t, 5, "deny");
    let p = memo_policy(spec, &state).unwrap();
    assert_eq!((p.action.as_str(), p.origin), ("utter_confirm_song", PolicyOrigin::Memo));
}

#[test]
fn replay_is_deterministic() {
    let script = ["hello", "what's the weather", "Mumbai", "yes", "play Stan", "yes", "call John", "no", "bye"];
    let run = || {
        let e = engine();
        let mut t = e.new_tracker("u");
        for s in script {
            e.handle_turn(&mut t, s);
        }
        serde_json::to_string(t.events()).unwrap()
    };
    assert_eq!(run(), run());
}

const TINY_DOMAIN: &str = "\
intents:
  - greet
  - ask
responses:
  utter_greet:
    - \"hi\"
  utter_story:
    - \"from story\"
  utter_rule:
    - \"from rule\"
";
const TINY_NLU: &str = "\
intents:
  greet:
    - \"hello\"
    - \"hi\"
    - \"hey\"
  ask:
    - \"question\"
    - \"query\"
    - \"ask\"
";

fn tiny_engine(stories: &str, rules: &str, registry: impl FnOnce(&mut ActionRegistry)) -> Engine {
    let mut domain = TINY_DOMAIN.to_string();
    if rules.contains("action_slow") || rules.contains("action_broken") {
        domain.push_str("actions:\n  - action_slow\n  - action_broken\n");
    }
    let docs = DocumentSet {
        domain,
        nlu: TINY_NLU.into(),
        stories: stories.into(),
        rules: rules.into(),
        config: "epochs: 200\nlearning_rate: 1.0\n".into(),
    };
    let spec = parse_domain(&docs).unwrap();
    let model = train(&spec, 0).unwrap();
    let mut actions = ActionRegistry::vehicle(mock_registry(&vehicle_fixtures(), Duration::ZERO).unwrap())
        .with_timeout(Duration::from_millis(100));
    registry(&mut actions);
    Engine::new(spec, model, actions).with_clock(Arc::new(SteppingClock::new(0, 1)))
}

#[test]
fn rule_beats_story_on_the_same_trigger() {
    let stories = "stories:\n  - story: s\n    steps:\n      - intent: ask\n      - action: utter_story\n";
    let rules = "rules:\n  - rule: r\n    steps:\n      - intent: ask\n      - action: utter_rule\n";
    let e = tiny_engine(stories, rules, |_| {});
    let mut t = e.new_tracker("u");
    for _ in 0..5 {
        let out = e.handle_turn(&mut t, "question");
        assert_eq!(out.actions(), ["utter_rule"]);
    }
}

#[test]
fn runaway_rule_hits_the_loop_guard() {
    let mut rules = "rules:\n  - rule: r\n    steps:\n      - intent: greet\n".to_string();
    for _ in 0..30 {
        rules.push_str("      - action: utter_greet\n");
    }
    let e = tiny_engine("", &rules, |_| {});
    let mut t = e.new_tracker("u");
    let out = e.handle_turn(&mut t, "hello");
    assert_eq!(out.predictions.len(), MAX_ACTIONS_PER_TURN + 2);
    assert_eq!(out.predictions.last().unwrap().action, "action_listen");
    assert!(out.messages.last().unwrap().text.starts_with("Sorry, something went wrong"));
    // The conversation is not wedged.
    assert_eq!(e.handle_turn(&mut t, "question").actions(), [ACTION_DEFAULT_FALLBACK]);
}

struct Slow;
impl CustomAction for Slow {
    fn name(&self) -> &str {
        "action_slow"
    }
    fn run(&self, _: &ActionContext) -> Result<ActionResult, ActionError> {
        std::thread::sleep(Duration::from_millis(500));
        Ok(ActionResult::default())
    }
}

#[test]
fn slow_and_unregistered_actions_are_contained() {
    let rules = "rules:\n  - rule: a\n    steps:\n      - intent: greet\n      - action: action_slow\n  - rule: b\n    steps:\n      - intent: ask\n      - action: action_broken\n";
    let e = tiny_engine("", rules, |r| r.register(Slow));
    assert_eq!(e.unregistered_actions(), ["action_broken"]);
    for (text, attempted) in [("hello", "action_slow"), ("question", "action_broken")] {
        let mut t = e.new_tracker("u");
        let out = e.handle_turn(&mut t, text);
        // The failed action was predicted but never recorded as executed.
        assert_eq!(out.actions(), [attempted, ACTION_DEFAULT_FALLBACK]);
        assert_eq!(executed(&t), [ACTION_DEFAULT_FALLBACK]);
        assert_eq!(out.messages.len(), 1);
        assert!(out.messages[0].text.starts_with("Sorry, something went wrong"));
        assert_eq!(out.predictions.last().unwrap().action, "action_listen");
    }
}

struct DownNews;
impl NewsProvider for DownNews {
    fn headlines(&self, _: usize, _: usize) -> Result<Vec<Headline>, ProviderError> {
        Err(ProviderError::Unavailable("offline".into()))
    }
}

#[test]
fn provider_failure_is_one_apology_and_no_slot_change() {
    let (spec, model) = trained_pack().clone();
    let mut providers = mock_registry(&vehicle_fixtures(), Duration::ZERO).unwrap();
    providers.news = Arc::new(DownNews);
    let e = Engine::new(spec, model, ActionRegistry::vehicle(providers));
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "what's the weather in Mumbai");
    e.handle_turn(&mut t, "yes");
    e.handle_turn(&mut t, "what's the news");
    let before = t.slots().clone();
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(texts(&out), ["Sorry, I couldn't fetch the news right now."]);
    assert_eq!(t.slots(), &before);
    assert!(executed(&t).contains(&"action_fetch_news".to_string()));
}

#[test]
fn not_found_clears_only_the_target_slot() {
    let e = engine();
    let mut t = e.new_tracker("u");
    e.handle_turn(&mut t, "play Stan");
    e.handle_turn(&mut t, "yes");
    e.handle_turn(&mut t, "call Nobody");
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(texts(&out), ["There is no contact named Nobody."]);
    assert_eq!(t.slot("contact"), None);
    assert_eq!(t.slot("now_playing"), Some(&SlotValue::from("Stan")));
    assert_eq!(t.slot("song"), Some(&SlotValue::from("Stan")));

    // "Paris" is a known location with no weather data.
    e.handle_turn(&mut t, "what's the weather in Paris");
    let out = e.handle_turn(&mut t, "yes");
    assert_eq!(out.messages.len(), 1);
    assert!(out.messages[0].text.starts_with("I couldn't find weather for Paris"));
    assert_eq!(t.slot("location"), None);
    assert_eq!(t.slot("destination"), Some(&SlotValue::from("Paris")));
}
