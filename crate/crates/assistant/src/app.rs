//! Wiring shared by the subcommands: loading packs and models, building the
//! engine against mock providers, and opening the tracker store.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use assistant_core::actions::{
    build_vehicle_pack, mock_registry, vehicle_eval_set, vehicle_fixtures, vehicle_scripts, ActionRegistry, FixtureSet,
};
use assistant_core::channel::Assistant;
use assistant_core::dialogue::{Engine, StageDelays, TrackerStore};
use assistant_core::domain::{lint_domain, parse_domain, parse_domain_with_warnings, DocumentSet, DomainError, DomainSpec};
use assistant_core::nlu::{train_with_report, ModelFile, TrainReport};

/// Reads a domain bundle from `dir`, or the bundled vehicle pack.
pub fn load_pack(dir: Option<&Path>) -> Result<DocumentSet> {
    match dir {
        Some(dir) => DocumentSet::read_dir(dir).with_context(|| format!("reading domain files from {}", dir.display())),
        None => Ok(build_vehicle_pack()),
    }
}

fn describe(err: DomainError) -> anyhow::Error {
    match err {
        DomainError::Syntax(e) => anyhow::anyhow!("{e}"),
        DomainError::Invalid(errors) => {
            let lines: Vec<String> = errors.iter().map(|e| format!("  {e}")).collect();
            anyhow::anyhow!("the domain has {} validation error(s):\n{}", errors.len(), lines.join("\n"))
        }
    }
}

/// Validates and trains; returns the model file, the training report and
/// any authoring warnings.
pub fn train_pack(docs: DocumentSet) -> Result<(ModelFile, TrainReport, Vec<String>)> {
    let (spec, mut warnings) = parse_domain_with_warnings(&docs).map_err(describe)?;
    warnings.extend(lint_domain(&spec));
    let (classifier, report) = train_with_report(&spec, 0)?;
    let warnings = warnings.into_iter().map(|w| w.message).collect();
    Ok((ModelFile::new(classifier, docs), report, warnings))
}

/// The bundled vehicle pack, trained.
pub fn bundled_model() -> Result<ModelFile> {
    Ok(train_pack(build_vehicle_pack())?.0)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    ModelFile::load(path).with_context(|| format!("loading model {}", path.display()))
}

/// The domain embedded in a model file.
pub fn model_spec(model: &ModelFile) -> Result<DomainSpec> {
    parse_domain(&model.domain).map_err(describe)
}

/// Fixture JSON from `dir`, or the bundled fixtures.
pub fn load_fixtures(dir: Option<&Path>) -> Result<FixtureSet> {
    match dir {
        Some(dir) => FixtureSet::read_dir(dir).with_context(|| format!("reading fixtures from {}", dir.display())),
        None => Ok(vehicle_fixtures()),
    }
}

/// Engine over mock providers that sleep `delays.provider` per call.
pub fn build_engine(model: &ModelFile, fixtures: &FixtureSet, delays: StageDelays) -> Result<Engine> {
    let spec = model_spec(model)?;
    let providers = mock_registry(fixtures, delays.provider)?;
    let engine = Engine::new(spec, model.classifier.clone(), ActionRegistry::vehicle(providers)).with_delays(delays);
    for name in engine.unregistered_actions() {
        tracing::warn!(action = name, "declared action has no implementation; it will fall back when predicted");
    }
    Ok(engine)
}

/// In-memory store, or a JSONL-backed one under `dir`.
pub fn open_store(spec: &DomainSpec, dir: Option<&Path>) -> Result<TrackerStore> {
    match dir {
        Some(dir) => TrackerStore::open(dir, spec).with_context(|| format!("opening tracker store {}", dir.display())),
        None => Ok(TrackerStore::in_memory(spec)),
    }
}

pub fn build_assistant(engine: Engine, store: TrackerStore, wake_word: &str) -> Result<Assistant> {
    if wake_word.split_whitespace().count() != 1 {
        bail!("the wake word must be a single word, got {wake_word:?}");
    }
    Ok(Assistant::new(Arc::new(engine), store, wake_word))
}

/// Writes the bundled pack (domain files, fixtures, eval set and bench
/// scripts) to `dir` so it can be edited and retrained.
pub fn export_pack(dir: &Path) -> Result<()> {
    build_vehicle_pack().write_dir(dir)?;
    let fixtures = vehicle_fixtures();
    let fixture_dir = dir.join("fixtures");
    fs::create_dir_all(&fixture_dir)?;
    let contents = [&fixtures.news, &fixtures.weather, &fixtures.routes, &fixtures.tracks, &fixtures.contacts];
    for (name, text) in FixtureSet::FILES.iter().zip(contents) {
        fs::write(fixture_dir.join(name), text)?;
    }
    fs::write(dir.join("eval.yml"), vehicle_eval_set())?;
    let script_dir = dir.join("scripts");
    fs::create_dir_all(&script_dir)?;
    for (name, text) in vehicle_scripts() {
        fs::write(script_dir.join(name), text)?;
    }
    Ok(())
}
