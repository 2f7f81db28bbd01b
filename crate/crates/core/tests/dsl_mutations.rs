#[path = "shared/mutations.rs"]
mod mutations;

use assistant_core::actions::build_vehicle_pack;
use assistant_core::domain::parse_domain;

#[test]
fn each_mutation_yields_exactly_one_targeted_error() {
    let pack = build_vehicle_pack();
    assert!(parse_domain(&pack).is_ok());
    assert!(mutations::MUTATIONS.len() >= 20);
    let failures = mutations::failures(&pack);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
