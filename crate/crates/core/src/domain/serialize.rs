use std::fmt::Write;

use super::markup::render_annotated;
use super::yaml::quote;
use super::*;

/// Renders a spec back into its canonical five-file form. All strings are
/// double-quoted, so the output is also valid YAML 1.2.
pub fn serialize_domain(spec: &DomainSpec) -> DocumentSet {
    DocumentSet {
        domain: domain_file(spec),
        nlu: nlu_file(spec),
        stories: stories_file(spec),
        rules: rules_file(spec),
        config: config_file(&spec.pipeline_config),
    }
}

fn domain_file(spec: &DomainSpec) -> String {
    let mut out = String::new();
    out.push_str("intents:\n");
    for i in &spec.intents {
        writeln!(out, "  - {}", i.name).unwrap();
    }
    if !spec.entities.is_empty() {
        out.push_str("entities:\n");
        for e in &spec.entities {
            writeln!(out, "  {}:", e.name).unwrap();
            if !e.lookup.is_empty() {
                out.push_str("    lookup:\n");
                for v in &e.lookup {
                    writeln!(out, "      - {}", quote(v)).unwrap();
                }
            }
            if !e.patterns.is_empty() {
                out.push_str("    patterns:\n");
                for p in &e.patterns {
                    writeln!(out, "      - {}", quote(p)).unwrap();
                }
            }
        }
    }
    if !spec.slots.is_empty() {
        out.push_str("slots:\n");
        for s in &spec.slots {
            writeln!(out, "  {}:", s.name).unwrap();
            writeln!(out, "    type: {}", s.kind.as_str()).unwrap();
            if let Some(f) = &s.fill_from {
                writeln!(out, "    fill_from: {f}").unwrap();
            }
            match &s.initial {
                Some(SlotValue::Bool(b)) => writeln!(out, "    initial: {b}").unwrap(),
                Some(SlotValue::Text(t)) => writeln!(out, "    initial: {}", quote(t)).unwrap(),
                None => {}
            }
        }
    }
    if !spec.responses.is_empty() {
        out.push_str("responses:\n");
        for r in &spec.responses {
            writeln!(out, "  {}:", r.name).unwrap();
            for v in &r.variants {
                writeln!(out, "    - {}", quote(v)).unwrap();
            }
        }
    }
    if !spec.custom_action_names.is_empty() {
        out.push_str("actions:\n");
        for a in &spec.custom_action_names {
            writeln!(out, "  - {a}").unwrap();
        }
    }
    out
}

fn nlu_file(spec: &DomainSpec) -> String {
    let mut out = String::from("intents:\n");
    for i in &spec.intents {
        writeln!(out, "  {}:", i.name).unwrap();
        for ex in &i.examples {
            writeln!(out, "    - {}", quote(&render_annotated(ex))).unwrap();
        }
    }
    out
}

fn user_step(out: &mut String, step: &UserStep) {
    writeln!(out, "      - intent: {}", step.intent).unwrap();
    if !step.entities.is_empty() {
        out.push_str("        entities:\n");
        for e in &step.entities {
            writeln!(out, "          - {e}").unwrap();
        }
    }
}

fn stories_file(spec: &DomainSpec) -> String {
    let mut out = String::new();
    if spec.stories.is_empty() {
        return out;
    }
    out.push_str("stories:\n");
    for s in &spec.stories {
        writeln!(out, "  - story: {}", s.name).unwrap();
        out.push_str("    steps:\n");
        for step in &s.steps {
            match step {
                Step::User(u) => user_step(&mut out, u),
                Step::Bot(a) => writeln!(out, "      - action: {a}").unwrap(),
            }
        }
    }
    out
}

fn rules_file(spec: &DomainSpec) -> String {
    let mut out = String::new();
    if spec.rules.is_empty() {
        return out;
    }
    out.push_str("rules:\n");
    for r in &spec.rules {
        writeln!(out, "  - rule: {}", r.name).unwrap();
        out.push_str("    steps:\n");
        user_step(&mut out, &r.trigger);
        for a in &r.then {
            writeln!(out, "      - action: {a}").unwrap();
        }
    }
    out
}

fn config_file(cfg: &PipelineConfig) -> String {
    // `{:?}` on f64 prints the shortest string that parses back exactly.
    format!(
        "epochs: {}\nlearning_rate: {:?}\nchar_ngram_range: [{}, {}]\nfallback_threshold: {:?}\n",
        cfg.epochs, cfg.learning_rate, cfg.char_ngram_range.0, cfg.char_ngram_range.1, cfg.fallback_threshold
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_rule_one_block() {
        let docs = DocumentSet {
            domain: "intents:\n  - bye\nresponses:\n  utter_bye:\n    - \"Bye {who}\"\nslots:\n  who:\n    type: text\n".into(),
            nlu: "intents:\n  bye:\n    - \"bye\"\n".into(),
            rules: "rules:\n  - rule: bye\n    steps:\n      - intent: bye\n      - action: utter_bye\n".into(),
            ..Default::default()
        };
        let spec = parse_domain(&docs).unwrap();
        let out = serialize_domain(&spec);
        assert_eq!(out.rules.matches("- rule:").count(), 1);
        assert_eq!(parse_domain(&out).unwrap(), spec);
    }
}
