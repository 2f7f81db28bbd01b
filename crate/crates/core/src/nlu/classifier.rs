//! Linear bag-of-features softmax intent classifier trained by full-batch
//! gradient descent on mean cross-entropy.
//!
//! Inputs are the L2-normalized feature counts, so every example has unit
//! norm and the loss is 1-smooth in (weights, biases): any learning rate up
//! to 2 gives a non-increasing loss trace.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::features::{featurize, Vocabulary};
use super::tokenize::tokenize;
use super::{IntentScore, NluResult};
use crate::domain::{DomainSpec, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrainError {
    #[error("intent `{0}` has no training examples")]
    NoExamples(String),
    #[error("domain declares no intents")]
    NoIntents,
    #[error("training diverged: non-finite parameters after epoch {0}")]
    Diverged(usize),
}

/// Dense parameters: `weights` is row-major `classes × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub classes: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Params {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Params {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
            biases: vec![0.0; classes],
        }
    }

    fn logits(&self, x: &[(usize, f64)]) -> Vec<f64> {
        (0..self.classes)
            .map(|k| {
                let row = &self.weights[k * self.dim..(k + 1) * self.dim];
                self.biases[k] + x.iter().map(|&(f, v)| row[f] * v).sum::<f64>()
            })
            .collect()
    }

    pub fn probabilities(&self, x: &[(usize, f64)]) -> Vec<f64> {
        softmax(&self.logits(x))
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// One training example: sparse normalized input and its class row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<(usize, f64)>,
    pub label: usize,
}

/// Mean cross-entropy over `data`.
pub fn loss(params: &Params, data: &[Sample]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|s| {
            let z = params.logits(&s.x);
            let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - z[s.label]
        })
        .sum();
    total / data.len() as f64
}

/// Mean cross-entropy and its analytic gradient.
pub fn loss_and_gradient(params: &Params, data: &[Sample]) -> (f64, Params) {
    let mut grad = Params::zeros(params.classes, params.dim);
    let mut total = 0.0;
    let n = data.len() as f64;
    for s in data {
        let z = params.logits(&s.x);
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - z[s.label];
        for (k, &zk) in z.iter().enumerate() {
            let p = (zk - lse).exp();
            let dz = p - if k == s.label { 1.0 } else { 0.0 };
            grad.biases[k] += dz;
            let row = &mut grad.weights[k * params.dim..(k + 1) * params.dim];
            for &(f, v) in &s.x {
                row[f] += dz * v;
            }
        }
    }
    grad.weights.iter_mut().for_each(|g| *g /= n);
    grad.biases.iter_mut().for_each(|g| *g /= n);
    (total / n, grad)
}

/// Runs `epochs` full-batch steps from `params`, returning the loss before
/// each step followed by the final loss.
pub fn gradient_descent(params: &mut Params, data: &[Sample], epochs: usize, learning_rate: f64) -> Result<Vec<f64>, TrainError> {
    let mut trace = Vec::with_capacity(epochs + 1);
    for epoch in 0..epochs {
        let (l, grad) = loss_and_gradient(params, data);
        trace.push(l);
        for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
            *w -= learning_rate * g;
        }
        for (b, g) in params.biases.iter_mut().zip(&grad.biases) {
            *b -= learning_rate * g;
        }
        if !params.weights.iter().chain(&params.biases).all(|v| v.is_finite()) {
            return Err(TrainError::Diverged(epoch + 1));
        }
    }
    trace.push(loss(params, data));
    Ok(trace)
}

/// Trained intent classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    intents: Vec<String>,
    vocab: Vocabulary,
    weights: Vec<f64>,
    biases: Vec<f64>,
    config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub training_accuracy: f64,
}

/// Turns every example of `spec` into a training sample for `vocab`.
pub fn training_samples(spec: &DomainSpec, vocab: &Vocabulary) -> Vec<Sample> {
    spec.intents
        .iter()
        .enumerate()
        .flat_map(|(label, intent)| {
            intent.examples.iter().map(move |ex| Sample {
                x: featurize(&tokenize(&ex.text), vocab).normalized(),
                label,
            })
        })
        .collect()
}

/// Trains on every example in `spec` using its pipeline config.
///
/// Weights start at zero and the descent is full-batch, so the result does
/// not depend on `seed`; it is accepted for callers that shuffle or
/// subsample before training.
pub fn train(spec: &DomainSpec, seed: u64) -> Result<ClassifierModel, TrainError> {
    train_with_report(spec, seed).map(|(m, _)| m)
}

pub fn train_with_report(spec: &DomainSpec, _seed: u64) -> Result<(ClassifierModel, TrainReport), TrainError> {
    if spec.intents.is_empty() {
        return Err(TrainError::NoIntents);
    }
    if let Some(empty) = spec.intents.iter().find(|i| i.examples.is_empty()) {
        return Err(TrainError::NoExamples(empty.name.clone()));
    }
    let config = spec.pipeline_config.clone();
    let tokenized: Vec<_> = spec
        .intents
        .iter()
        .flat_map(|i| i.examples.iter().map(|e| tokenize(&e.text)))
        .collect();
    let vocab = Vocabulary::build(tokenized.iter().map(Vec::as_slice), Some(config.char_ngram_range));
    let data = training_samples(spec, &vocab);
    let mut params = Params::zeros(spec.intents.len(), vocab.len());
    let loss_trace = gradient_descent(&mut params, &data, config.epochs, config.learning_rate)?;
    let correct = data
        .iter()
        .filter(|s| argmax(&params.probabilities(&s.x)) == s.label)
        .count();
    let model = ClassifierModel {
        intents: spec.intents.iter().map(|i| i.name.clone()).collect(),
        vocab,
        weights: params.weights,
        biases: params.biases,
        config,
    };
    let report = TrainReport {
        loss_trace,
        training_accuracy: correct as f64 / data.len() as f64,
    };
    Ok((model, report))
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

impl ClassifierModel {
    pub fn intents(&self) -> &[String] {
        &self.intents
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn params(&self) -> Params {
        Params {
            classes: self.intents.len(),
            dim: self.vocab.len(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        }
    }

    /// Checks the structural invariants of a loaded model.
    pub fn check(&self) -> Result<(), String> {
        let k = self.intents.len();
        if self.weights.len() != k * self.vocab.len() || self.biases.len() != k {
            return Err("parameter shapes do not match intents × vocabulary".into());
        }
        if !self.weights.iter().chain(&self.biases).all(|v| v.is_finite()) {
            return Err("non-finite parameters".into());
        }
        Ok(())
    }

    /// Softmax over intents for `utterance`. Empty input is uniform.
    pub fn probabilities(&self, utterance: &str) -> Vec<f64> {
        let tokens = tokenize(utterance);
        if tokens.is_empty() {
            return vec![1.0 / self.intents.len() as f64; self.intents.len()];
        }
        let x = featurize(&tokens, &self.vocab).normalized();
        let dim = self.vocab.len();
        let z: Vec<f64> = (0..self.intents.len())
            .map(|k| {
                let row = &self.weights[k * dim..(k + 1) * dim];
                self.biases[k] + x.iter().map(|&(f, v)| row[f] * v).sum::<f64>()
            })
            .collect();
        softmax(&z)
    }

    /// Ranks all intents. Empty (or all-whitespace) input is a fallback
    /// without consulting the weights.
    pub fn classify(&self, utterance: &str) -> NluResult {
        let empty = utterance.trim().is_empty();
        let probs = self.probabilities(utterance);
        let mut ranking: Vec<IntentScore> = self
            .intents
            .iter()
            .zip(probs)
            .map(|(name, confidence)| IntentScore {
                name: name.clone(),
                confidence,
            })
            .collect();
        ranking.sort_by(|a, b| {
            b.confidence
                .partial_cmp(&a.confidence)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.name.cmp(&b.name))
        });
        let top = ranking.first().map(|s| s.confidence).unwrap_or(0.0);
        NluResult {
            text: utterance.to_string(),
            ranking,
            entities: Vec::new(),
            is_fallback: empty || top < self.config.fallback_threshold,
        }
    }
}
