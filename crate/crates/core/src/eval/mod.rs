//! Measurement harness: intent accuracy with a confusion matrix, per
//! action-type and per-module turn latency, and report rendering.

mod dataset;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use dataset::{parse_eval_set, parse_script, DatasetError, LabeledUtterance, Script};
pub use report::{render_report, write_report, REPORT_JSON, REPORT_TXT};

use crate::channel::{Assistant, Reply};
use crate::dialogue::{is_prompt, Engine, TrackerStore, TurnOutcome};
use crate::domain::DomainSpec;
use crate::nlu::ClassifierModel;

/// Turn classes of the latency tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    IntentIdentification,
    InputConfirmation,
    ApiCallOutput,
}

impl ActionType {
    pub const ALL: [ActionType; 3] = [
        ActionType::IntentIdentification,
        ActionType::InputConfirmation,
        ActionType::ApiCallOutput,
    ];

    pub fn caption(self) -> &'static str {
        match self {
            ActionType::IntentIdentification => "Intent Identification",
            ActionType::InputConfirmation => "Input & Confirmation",
            ActionType::ApiCallOutput => "API Call & Output",
        }
    }
}

/// Feature modules, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    General,
    Music,
    Navigation,
    Communication,
    Weather,
    News,
}

impl Module {
    pub const ALL: [Module; 6] = [
        Module::General,
        Module::Music,
        Module::Navigation,
        Module::Communication,
        Module::Weather,
        Module::News,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::General => "general",
            Module::Music => "music",
            Module::Navigation => "navigation",
            Module::Communication => "communication",
            Module::Weather => "weather",
            Module::News => "news",
        }
    }

    pub fn caption(self) -> &'static str {
        match self {
            Module::General => "General Interaction",
            Module::Music => "Music",
            Module::Navigation => "Navigation",
            Module::Communication => "Communication",
            Module::Weather => "Weather",
            Module::News => "News",
        }
    }

    pub fn from_name(name: &str) -> Option<Module> {
        Module::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub text: String,
    pub expected: String,
    pub predicted: String,
}

impl Prediction {
    pub fn is_correct(&self) -> bool {
        self.expected == self.predicted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentAccuracy {
    pub accuracy: f64,
    pub correct_count: usize,
    pub total_count: usize,
    /// Row/column labels of `confusion`, in spec declaration order.
    pub labels: Vec<String>,
    /// `confusion[expected][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<Prediction>,
}

impl IntentAccuracy {
    pub fn misclassified(&self) -> impl Iterator<Item = &Prediction> {
        self.predictions.iter().filter(|p| !p.is_correct())
    }
}

/// Classifies every utterance and tallies the confusion matrix. The
/// predicted label is the top-ranked intent, whether or not it clears the
/// fallback threshold.
pub fn eval_intents(
    model: &ClassifierModel,
    spec: &DomainSpec,
    dataset: &[LabeledUtterance],
) -> Result<IntentAccuracy, DatasetError> {
    if dataset.is_empty() {
        return Err(DatasetError::Empty);
    }
    let labels: Vec<String> = spec.intents.iter().map(|i| i.name.clone()).collect();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if let Some((i, u)) = dataset.iter().enumerate().find(|(_, u)| !index.contains_key(u.expected_intent.as_str())) {
        return Err(DatasetError::UnknownIntent {
            index: i,
            intent: u.expected_intent.clone(),
        });
    }
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let mut predictions = Vec::with_capacity(dataset.len());
    for u in dataset {
        let result = model.classify(&u.text);
        let predicted = result.top().map(|t| t.name.clone()).unwrap_or_default();
        let row = index[u.expected_intent.as_str()];
        if let Some(&col) = index.get(predicted.as_str()) {
            confusion[row][col] += 1;
        }
        predictions.push(Prediction {
            text: u.text.clone(),
            expected: u.expected_intent.clone(),
            predicted,
        });
    }
    let correct_count: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();
    Ok(IntentAccuracy {
        accuracy: correct_count as f64 / dataset.len() as f64,
        correct_count,
        total_count: dataset.len(),
        labels,
        confusion,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub action_type: ActionType,
    pub module: Module,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow<K> {
    pub key: K,
    pub mean_ms: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub repetitions: usize,
    /// Rows in [`ActionType::ALL`] order; types never observed are omitted.
    pub by_action: Vec<LatencyRow<ActionType>>,
    /// Rows in [`Module::ALL`] order; modules never observed are omitted.
    pub by_module: Vec<LatencyRow<Module>>,
    /// Repetitions whose own action-type means were strictly increasing
    /// intent_identification < input_confirmation < api_call_output.
    pub ordered_repetitions: usize,
}

impl LatencyReport {
    pub fn action_mean(&self, t: ActionType) -> Option<f64> {
        self.by_action.iter().find(|r| r.key == t).map(|r| r.mean_ms)
    }

    pub fn module_mean(&self, m: Module) -> Option<f64> {
        self.by_module.iter().find(|r| r.key == m).map(|r| r.mean_ms)
    }

    /// Module with the smallest mean (ties: table order).
    pub fn fastest_module(&self) -> Option<Module> {
        self.by_module
            .iter()
            .min_by(|a, b| a.mean_ms.total_cmp(&b.mean_ms))
            .map(|r| r.key)
    }
}

/// Classifies a completed turn by the most expensive thing it did.
pub fn tag_turn(spec: &DomainSpec, outcome: &TurnOutcome) -> ActionType {
    let actions = outcome.actions();
    if actions.iter().any(|a| spec.is_custom_action(a)) {
        ActionType::ApiCallOutput
    } else if actions.iter().any(|a| is_prompt(a)) {
        ActionType::InputConfirmation
    } else {
        ActionType::IntentIdentification
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn rows<K: Copy + Ord>(order: &[K], samples: impl Iterator<Item = (K, f64)>) -> Vec<LatencyRow<K>> {
    let mut groups: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in samples {
        groups.entry(k).or_default().push(v);
    }
    order
        .iter()
        .filter_map(|k| {
            groups.get(k).map(|v| LatencyRow {
                key: *k,
                mean_ms: mean(v),
                samples: v.len(),
            })
        })
        .collect()
}

pub fn summarize_latency(samples_by_rep: &[Vec<LatencySample>]) -> LatencyReport {
    let all = || samples_by_rep.iter().flatten();
    let ordered_repetitions = samples_by_rep
        .iter()
        .filter(|rep| {
            let r = rows(&ActionType::ALL, rep.iter().map(|s| (s.action_type, s.elapsed_ms)));
            r.len() == 3 && r[0].mean_ms < r[1].mean_ms && r[1].mean_ms < r[2].mean_ms
        })
        .count();
    LatencyReport {
        repetitions: samples_by_rep.len(),
        by_action: rows(&ActionType::ALL, all().map(|s| (s.action_type, s.elapsed_ms))),
        by_module: rows(&Module::ALL, all().map(|s| (s.module, s.elapsed_ms))),
        ordered_repetitions,
    }
}

/// Runs every script `repetitions` times, each run in a fresh
/// conversation, timing each turn end to end. Wake-word turns and
/// messages ignored while dormant are not sampled.
pub fn bench_latency(assistant: &Assistant, scripts: &[Script], repetitions: usize) -> (LatencyReport, Vec<Vec<LatencySample>>) {
    let spec = assistant.engine().spec();
    let mut by_rep = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let mut samples = Vec::new();
        for (i, script) in scripts.iter().enumerate() {
            let sender = format!("bench-{rep}-{i}-{}", script.module);
            for turn in &script.turns {
                let started = Instant::now();
                let reply = match assistant.respond(&sender, turn) {
                    Ok((reply, _)) => reply,
                    Err(e) => {
                        tracing::error!(error = %e, "bench turn failed");
                        continue;
                    }
                };
                let elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
                if let Reply::Turn(outcome) = reply {
                    samples.push(LatencySample {
                        action_type: tag_turn(spec, &outcome),
                        module: script.module,
                        elapsed_ms,
                    });
                }
            }
        }
        by_rep.push(samples);
    }
    (summarize_latency(&by_rep), by_rep)
}

/// Runs `repetitions` independent benches spread over up to `jobs` threads.
/// Each repetition talks to its own in-memory store, so repetitions never
/// share conversation state. With `jobs == 1` this is [`bench_latency`].
pub fn bench_repetitions(
    engine: &Arc<Engine>,
    wake_word: &str,
    scripts: &[Script],
    repetitions: usize,
    jobs: usize,
) -> (LatencyReport, Vec<Vec<LatencySample>>) {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<LatencySample>>>> = Mutex::new(vec![None; repetitions]);
    thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, repetitions.max(1)) {
            scope.spawn(|| loop {
                let rep = next.fetch_add(1, Ordering::Relaxed);
                if rep >= repetitions {
                    break;
                }
                let assistant = Assistant::new(engine.clone(), TrackerStore::in_memory(engine.spec()), wake_word);
                let (_, mut samples) = bench_latency(&assistant, scripts, 1);
                slots.lock().expect("bench results lock")[rep] = samples.pop();
            });
        }
    });
    let by_rep: Vec<Vec<LatencySample>> = slots
        .into_inner()
        .expect("bench results lock")
        .into_iter()
        .map(Option::unwrap_or_default)
        .collect();
    (summarize_latency(&by_rep), by_rep)
}

/// Everything the bench and eval commands measure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intents: Option<IntentAccuracy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
