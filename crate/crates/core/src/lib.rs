//! Vehicle voice-assistant engine: a declarative domain bundle, an NLU
//! pipeline (tokenizer, featurizer, softmax intent classifier, entity
//! extractor), a rule/memoization dialogue core, task actions over
//! pluggable providers, session gating for channels and an evaluation bench.

pub mod domain;
pub mod nlu;
pub mod actions;
pub mod dialogue;
pub mod channel;
pub mod eval;
