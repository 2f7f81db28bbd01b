//! Single-edit corruptions of a valid bundle, each expected to produce
//! exactly one validation error of a given kind and name.

use assistant_core::domain::{parse_domain, DocumentKind, DocumentSet, ValidationKind};

pub struct Mutation {
    pub file: DocumentKind,
    pub find: &'static str,
    pub replace: &'static str,
    pub kind: ValidationKind,
    pub name: &'static str,
}

const fn m(file: DocumentKind, find: &'static str, replace: &'static str, kind: ValidationKind, name: &'static str) -> Mutation {
    Mutation {
        file,
        find,
        replace,
        kind,
        name,
    }
}

use DocumentKind::{Config, Domain, Nlu, Rules, Stories};
use ValidationKind::*;

pub const MUTATIONS: &[Mutation] = &[
    m(Domain, "  - greet\n", "  - greet\n  - greet\n", DuplicateName, "greet"),
    m(Domain, "intents:\n", "colour: blue\nintents:\n", UnknownKey, "colour"),
    m(Domain, "  - inform_person\n", "  - inform_person\n  - hum\n", MissingExamples, "hum"),
    m(Domain, "  - inform_person\n", "  - inform_person\n  - Hum\n", InvalidIdentifier, "Hum"),
    m(Domain, "fill_from: person", "fill_from: people", DanglingEntity, "people"),
    m(Domain, "Did you say {location}?", "Did you say {place}?", DanglingSlot, "place"),
    m(Domain, "responses:\n", "responses:\n  greeting_text:\n    - \"hi\"\n", InvalidResponse, "greeting_text"),
    m(Domain, "  now_playing:\n    type: text\n", "  now_playing:\n    fill_from: song\n", MissingField, "now_playing"),
    m(Domain, "  - action_place_call\n", "  - action_place_call\n  - action_listen\n", DuplicateName, "action_listen"),
    m(Domain, "slots:\n", "  colour:\n    lookup: []\n\nslots:\n", EmptyEntity, "colour"),
    m(Domain, "slots:\n", "  plate:\n    patterns:\n      - \"[A-Z\"\n\nslots:\n", InvalidPattern, "plate"),
    m(Nlu, "    - \"hello\"\n", "    - \"hello\"\n    - \"hi [Mumbai](city)\"\n", DanglingEntity, "city"),
    m(Nlu, "intents:\n", "intents:\n  hum:\n    - \"hmm\"\n", DanglingIntent, "hum"),
    m(Stories, "      - intent: news_request\n", "      - intent: news_requests\n", DanglingIntent, "news_requests"),
    m(Stories, "      - action: utter_ok\n", "      - action: utter_okay\n", DanglingAction, "utter_okay"),
    m(Stories, "stories:\n", "stories:\n  - story: empty\n    steps: []\n", InvalidStory, "empty"),
    m(Stories, "stories:\n", "stories:\n  - story: mute\n    steps:\n      - action: utter_ok\n", InvalidStory, "mute"),
    m(Rules, "      - action: utter_greet\n", "      - action: utter_greeting\n", DanglingAction, "utter_greeting"),
    m(Rules, "rules:\n", "rules:\n  - rule: greet_again\n    steps:\n      - intent: greet\n      - action: utter_ok\n", RuleTriggerCollision, "greet"),
    m(Rules, "rules:\n", "rules:\n  - rule: orphan\n    steps:\n      - action: utter_ok\n", InvalidRule, "orphan"),
    // Deleted declarations leave every reference dangling; one error per name.
    m(Domain, "  utter_ok:\n    - \"Okay.\"\n", "", DanglingAction, "utter_ok"),
    m(Domain, "  - action_navigate\n", "", DanglingAction, "action_navigate"),
    m(Domain, "  - deny\n", "", DanglingIntent, "deny"),
    m(Domain, "  song:\n    lookup:\n", "  tune:\n    lookup:\n", DanglingEntity, "song"),
    m(Config, "epochs: 500", "epochs: 0", InvalidConfig, "epochs"),
    m(Config, "learning_rate: 2.0", "learning_rate: -1", InvalidConfig, "learning_rate"),
    m(Config, "fallback_threshold: 0.3", "fallback_threshold: 1.5", InvalidConfig, "fallback_threshold"),
];

pub fn apply(docs: &DocumentSet, mutation: &Mutation) -> DocumentSet {
    let mut out = docs.clone();
    let text = match mutation.file {
        Domain => &mut out.domain,
        Nlu => &mut out.nlu,
        Stories => &mut out.stories,
        Rules => &mut out.rules,
        Config => &mut out.config,
    };
    assert!(text.contains(mutation.find), "pattern {:?} not in {:?}", mutation.find, mutation.file);
    *text = text.replacen(mutation.find, mutation.replace, 1);
    out
}

/// Applies every mutation to `pack` and describes each one that did not
/// yield exactly its targeted error.
pub fn failures(pack: &DocumentSet) -> Vec<String> {
    let mut out = Vec::new();
    for (i, mutation) in MUTATIONS.iter().enumerate() {
        let errors = match parse_domain(&apply(pack, mutation)) {
            Ok(_) => {
                out.push(format!("#{i} {:?} {}: accepted", mutation.kind, mutation.name));
                continue;
            }
            Err(e) => e.validation_errors().to_vec(),
        };
        let ok = errors.len() == 1 && errors[0].kind == mutation.kind && errors[0].name == mutation.name;
        if !ok {
            out.push(format!("#{i} {:?} {}: got {errors:?}", mutation.kind, mutation.name));
        }
    }
    out
}
