//! The shipped vehicle-assistant pack, compiled into the binary so it can be
//! used without a checkout of the pack directory.

use super::mock::FixtureSet;
use crate::domain::DocumentSet;

pub const VEHICLE_WAKE_WORD: &str = "coffee";

/// The five DSL files of the vehicle domain.
pub fn build_vehicle_pack() -> DocumentSet {
    DocumentSet {
        domain: include_str!("../../pack/domain.yml").to_string(),
        nlu: include_str!("../../pack/nlu.yml").to_string(),
        stories: include_str!("../../pack/stories.yml").to_string(),
        rules: include_str!("../../pack/rules.yml").to_string(),
        config: include_str!("../../pack/config.yml").to_string(),
    }
}

pub fn vehicle_fixtures() -> FixtureSet {
    FixtureSet {
        news: include_str!("../../pack/fixtures/news.json").to_string(),
        weather: include_str!("../../pack/fixtures/weather.json").to_string(),
        routes: include_str!("../../pack/fixtures/routes.json").to_string(),
        tracks: include_str!("../../pack/fixtures/tracks.json").to_string(),
        contacts: include_str!("../../pack/fixtures/contacts.json").to_string(),
    }
}

/// The labelled evaluation utterances (`eval.yml` text).
pub fn vehicle_eval_set() -> &'static str {
    include_str!("../../pack/eval.yml")
}

/// One conversation script per module, as `(file name, text)`.
pub fn vehicle_scripts() -> Vec<(&'static str, &'static str)> {
    vec![
        ("general.yml", include_str!("../../pack/scripts/general.yml")),
        ("music.yml", include_str!("../../pack/scripts/music.yml")),
        ("navigation.yml", include_str!("../../pack/scripts/navigation.yml")),
        ("communication.yml", include_str!("../../pack/scripts/communication.yml")),
        ("weather.yml", include_str!("../../pack/scripts/weather.yml")),
        ("news.yml", include_str!("../../pack/scripts/news.yml")),
    ]
}
