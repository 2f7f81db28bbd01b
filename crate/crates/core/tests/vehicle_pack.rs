use assistant_core::actions::{build_vehicle_pack, mock_registry, vehicle_fixtures, ActionRegistry};
use assistant_core::domain::{lint_domain, parse_domain, parse_domain_with_warnings, serialize_domain, DomainSpec};
use assistant_core::nlu::{train_with_report, Interpreter};
use std::time::Duration;

fn pack() -> DomainSpec {
    parse_domain(&build_vehicle_pack()).expect("shipped pack parses")
}

#[test]
fn pack_parses_and_lints_clean() {
    let (spec, warnings) = parse_domain_with_warnings(&build_vehicle_pack()).unwrap();
    assert!(warnings.is_empty(), "{warnings:#?}");
    assert!(lint_domain(&spec).is_empty(), "{:#?}", lint_domain(&spec));
    assert_eq!(spec.intents.len(), 12);
    let names: Vec<_> = spec.entities.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["location", "song", "person"]);
}

#[test]
fn pack_round_trips() {
    let spec = pack();
    assert_eq!(parse_domain(&serialize_domain(&spec)).unwrap(), spec);
}

#[test]
fn every_pack_action_is_registered() {
    let providers = mock_registry(&vehicle_fixtures(), Duration::ZERO).unwrap();
    let registry = ActionRegistry::vehicle(providers);
    for a in &pack().custom_action_names {
        assert!(registry.contains(a), "{a} has no implementation");
    }
}

#[test]
fn training_accuracy_meets_target() {
    let spec = pack();
    let (_model, report) = train_with_report(&spec, 0).unwrap();
    eprintln!("training accuracy {:.4}", report.training_accuracy);
    assert!(report.training_accuracy >= 0.95, "{}", report.training_accuracy);
}

#[test]
fn table3_utterances() {
    let spec = pack();
    let (model, _) = train_with_report(&spec, 0).unwrap();
    let nlu = Interpreter::new(model, &spec);
    let cases = [
        ("Sunlight", "inform_song", "song"),
        ("Mumbai", "inform_location", "location"),
        ("Delhi", "inform_location", "location"),
        ("John", "inform_person", "person"),
        ("99 Problems", "inform_song", "song"),
        ("Sachin", "inform_person", "person"),
        ("New York", "inform_location", "location"),
        ("Stan", "inform_song", "song"),
    ];
    for (text, intent, entity) in cases {
        let r = nlu.parse(text);
        assert_eq!(r.effective_intent(), intent, "{text}: {:?}", &r.ranking[..3]);
        assert_eq!(r.entities.len(), 1, "{text}");
        assert_eq!(r.entities[0].entity, entity);
        assert_eq!(r.entities[0].value, text);
    }
    // Shared gazetteer value: resolves to location by the extraction tie-break.
    assert_eq!(nlu.parse("Paris").entities[0].entity, "location");
}

#[test]
fn eval_set_accuracy_meets_target() {
    use assistant_core::actions::vehicle_eval_set;
    use assistant_core::eval::{eval_intents, parse_eval_set};
    let spec = pack();
    let (model, _) = train_with_report(&spec, 0).unwrap();
    let dataset = parse_eval_set(vehicle_eval_set()).unwrap();
    assert_eq!(dataset.len(), 300);
    let report = eval_intents(&model, &spec, &dataset).unwrap();
    for p in report.misclassified() {
        eprintln!("  {:?}: expected {} got {}", p.text, p.expected, p.predicted);
    }
    eprintln!("eval accuracy {:.4}", report.accuracy);
    assert!(report.accuracy >= 0.90, "{}", report.accuracy);
}
