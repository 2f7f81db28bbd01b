//! Utterance understanding: whitespace tokenization, word + char n-gram
//! featurization, softmax intent classification and gazetteer/pattern
//! entity extraction.

mod classifier;
mod entities;
mod features;
mod persist;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use classifier::{
    gradient_descent, loss, loss_and_gradient, softmax, train, train_with_report, training_samples, ClassifierModel,
    Params, Sample, TrainError, TrainReport,
};
pub use entities::{extract_entities, EntityExtractor, EntityMatch, EntitySource};
pub use features::{feature_keys, featurize, word_form, FeatureKey, FeatureVector, Vocabulary, BOUNDARY};
pub use persist::{ModelFile, PersistError, MODEL_FORMAT, MODEL_VERSION};
pub use tokenize::{tokenize, Token, TokenSeq};

use crate::domain::{DomainSpec, INTENT_NLU_FALLBACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentScore {
    pub name: String,
    pub confidence: f64,
}

/// Intent ranking plus entities for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluResult {
    pub text: String,
    /// All intents, by descending confidence then name.
    pub ranking: Vec<IntentScore>,
    pub entities: Vec<EntityMatch>,
    pub is_fallback: bool,
}

impl NluResult {
    pub fn top(&self) -> Option<&IntentScore> {
        self.ranking.first()
    }

    /// The top intent name, or `nlu_fallback` when below threshold.
    pub fn effective_intent(&self) -> &str {
        match self.top() {
            Some(top) if !self.is_fallback => &top.name,
            _ => INTENT_NLU_FALLBACK,
        }
    }

    pub fn entity_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.entities.iter().map(|e| e.entity.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }
}

/// A trained model paired with the extractor for the same spec.
#[derive(Debug, Clone)]
pub struct Interpreter {
    model: ClassifierModel,
    extractor: EntityExtractor,
}

impl Interpreter {
    pub fn new(model: ClassifierModel, spec: &DomainSpec) -> Self {
        Interpreter {
            extractor: EntityExtractor::new(spec),
            model,
        }
    }

    pub fn model(&self) -> &ClassifierModel {
        &self.model
    }

    pub fn parse(&self, utterance: &str) -> NluResult {
        let tokens = tokenize(utterance);
        let mut result = self.model.classify(utterance);
        result.entities = self.extractor.extract(utterance, &tokens);
        result
    }
}

/// Full pipeline for one utterance.
pub fn nlu(model: &ClassifierModel, spec: &DomainSpec, utterance: &str) -> NluResult {
    let tokens = tokenize(utterance);
    let mut result = model.classify(utterance);
    result.entities = extract_entities(spec, utterance, &tokens);
    result
}
