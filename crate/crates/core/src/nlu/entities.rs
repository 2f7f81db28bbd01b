use std::collections::HashMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::features::word_form;
use super::tokenize::Token;
use crate::domain::DomainSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntitySource {
    Lookup,
    Pattern,
}

/// An extracted entity. `start`/`end` are char offsets into the utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub entity: String,
    /// Canonical gazetteer value for lookup hits, matched text for patterns.
    pub value: String,
    pub start: usize,
    pub end: usize,
    pub source: EntitySource,
}

/// Gazetteer and pattern matcher compiled from a spec's entity definitions.
#[derive(Debug, Clone)]
pub struct EntityExtractor {
    /// normalized phrase -> (entity, canonical value), per entity in declaration order
    lookup: HashMap<String, Vec<(String, String)>>,
    max_phrase_tokens: usize,
    patterns: Vec<(String, Regex)>,
}

fn normalize_phrase(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| word_form(&w.to_lowercase()).to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

impl EntityExtractor {
    pub fn new(spec: &DomainSpec) -> Self {
        let mut lookup: HashMap<String, Vec<(String, String)>> = HashMap::new();
        let mut max_phrase_tokens = 0;
        let mut patterns = Vec::new();
        for e in &spec.entities {
            for value in &e.lookup {
                let words = normalize_phrase(value);
                if words.is_empty() {
                    continue;
                }
                max_phrase_tokens = max_phrase_tokens.max(words.len());
                let slot = lookup.entry(words.join(" ")).or_default();
                if !slot.iter().any(|(name, _)| name == &e.name) {
                    slot.push((e.name.clone(), value.clone()));
                }
            }
            for p in &e.patterns {
                // Patterns were validated at parse time.
                if let Ok(re) = Regex::new(&format!("(?i){p}")) {
                    patterns.push((e.name.clone(), re));
                }
            }
        }
        EntityExtractor {
            lookup,
            max_phrase_tokens,
            patterns,
        }
    }

    /// Longest-match gazetteer scan over token n-grams, then regex patterns
    /// over the raw text. Overlaps resolve longest first, then leftmost,
    /// then lookup before pattern, then entity name.
    pub fn extract(&self, utterance: &str, tokens: &[Token]) -> Vec<EntityMatch> {
        let mut candidates = Vec::new();

        // Token words with punctuation trimmed, plus their trimmed char spans.
        let words: Vec<Option<(String, usize, usize)>> = tokens
            .iter()
            .map(|t| {
                let chars: Vec<char> = t.text.chars().collect();
                let lead = chars.iter().take_while(|c| !c.is_alphanumeric()).count();
                if lead == chars.len() {
                    return None;
                }
                let trail = chars.iter().rev().take_while(|c| !c.is_alphanumeric()).count();
                let w: String = chars[lead..chars.len() - trail].iter().collect();
                Some((w, t.start + lead, t.end - trail))
            })
            .collect();

        for i in 0..words.len() {
            let mut phrase = String::new();
            for n in 1..=self.max_phrase_tokens.min(words.len() - i) {
                let Some((w, _, end)) = &words[i + n - 1] else { break };
                if n > 1 {
                    phrase.push(' ');
                }
                phrase.push_str(w);
                if let Some(hits) = self.lookup.get(&phrase) {
                    let start = words[i].as_ref().unwrap().1;
                    for (entity, value) in hits {
                        candidates.push(EntityMatch {
                            entity: entity.clone(),
                            value: value.clone(),
                            start,
                            end: *end,
                            source: EntitySource::Lookup,
                        });
                    }
                }
            }
        }

        for (entity, re) in &self.patterns {
            for m in re.find_iter(utterance) {
                if m.as_str().is_empty() {
                    continue;
                }
                let start = utterance[..m.start()].chars().count();
                candidates.push(EntityMatch {
                    entity: entity.clone(),
                    value: m.as_str().to_string(),
                    start,
                    end: start + m.as_str().chars().count(),
                    source: EntitySource::Pattern,
                });
            }
        }

        candidates.sort_by(|a, b| {
            (b.end - b.start)
                .cmp(&(a.end - a.start))
                .then(a.start.cmp(&b.start))
                .then(a.source.cmp(&b.source))
                .then_with(|| a.entity.cmp(&b.entity))
        });
        let mut chosen: Vec<EntityMatch> = Vec::new();
        for c in candidates {
            if chosen.iter().all(|k| c.end <= k.start || c.start >= k.end) {
                chosen.push(c);
            }
        }
        chosen.sort_by_key(|m| m.start);
        chosen
    }
}

/// One-shot extraction; prefer holding an [`EntityExtractor`] for repeated use.
pub fn extract_entities(spec: &DomainSpec, utterance: &str, tokens: &[Token]) -> Vec<EntityMatch> {
    EntityExtractor::new(spec).extract(utterance, tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{EntityDef, PipelineConfig};
    use crate::nlu::tokenize;
    use proptest::prelude::*;

    fn spec(entities: Vec<EntityDef>) -> DomainSpec {
        DomainSpec {
            intents: vec![],
            entities,
            slots: vec![],
            responses: vec![],
            custom_action_names: vec![],
            stories: vec![],
            rules: vec![],
            pipeline_config: PipelineConfig::default(),
        }
    }

    fn lookup(name: &str, values: &[&str]) -> EntityDef {
        EntityDef {
            name: name.into(),
            lookup: values.iter().map(|s| s.to_string()).collect(),
            patterns: vec![],
        }
    }

    fn run(spec: &DomainSpec, text: &str) -> Vec<(String, String, usize, usize)> {
        extract_entities(spec, text, &tokenize(text))
            .into_iter()
            .map(|m| (m.entity, m.value, m.start, m.end))
            .collect()
    }

    #[test]
    fn person_from_gazetteer() {
        let s = spec(vec![lookup("person", &["John", "Sachin", "Suresh"])]);
        assert_eq!(run(&s, "call John"), [("person".into(), "John".into(), 5, 9)]);
        assert_eq!(run(&s, "call john."), [("person".into(), "John".into(), 5, 9)]);
    }

    #[test]
    fn multi_token_location_is_one_match() {
        let s = spec(vec![lookup("location", &["New York", "York"])]);
        assert_eq!(run(&s, "navigate to New York"), [("location".into(), "New York".into(), 12, 20)]);
    }

    #[test]
    fn no_hit_is_empty() {
        let s = spec(vec![lookup("person", &["John"])]);
        assert!(run(&s, "hello").is_empty());
    }

    #[test]
    fn equal_length_ties_go_to_lookup_then_name() {
        let s = spec(vec![
            lookup("song", &["Paris"]),
            lookup("location", &["Paris"]),
            EntityDef {
                name: "city_code".into(),
                lookup: vec![],
                patterns: vec!["par\\w+".into()],
            },
        ]);
        let got = extract_entities(&s, "Paris", &tokenize("Paris"));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].entity, "location");
        assert_eq!(got[0].source, EntitySource::Lookup);
    }

    #[test]
    fn longer_pattern_beats_shorter_lookup() {
        let s = spec(vec![
            lookup("song", &["99"]),
            EntityDef {
                name: "number".into(),
                lookup: vec![],
                patterns: vec!["\\d+ problems".into()],
            },
        ]);
        assert_eq!(run(&s, "play 99 Problems"), [("number".into(), "99 Problems".into(), 5, 16)]);
    }

    proptest! {
        #[test]
        fn spans_reproduce_their_source(words in proptest::collection::vec(
            prop_oneof![Just("new"), Just("York"), Just("call"), Just("John!"), Just("99"), Just("problems"), Just("x7")], 0..8)
        ) {
            let text = words.join(" ");
            let s = spec(vec![
                lookup("location", &["New York"]),
                lookup("person", &["John"]),
                lookup("song", &["99 Problems"]),
                EntityDef { name: "code".into(), lookup: vec![], patterns: vec!["x\\d".into()] },
            ]);
            let chars: Vec<char> = text.chars().collect();
            let found = extract_entities(&s, &text, &tokenize(&text));
            for (i, m) in found.iter().enumerate() {
                let span: String = chars[m.start..m.end].iter().collect();
                let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                prop_assert_eq!(norm(&span), norm(&m.value));
                for other in &found[i + 1..] {
                    prop_assert!(m.end <= other.start);
                }
            }
        }
    }
}
