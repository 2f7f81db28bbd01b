//! Declarative domain bundle: intents with examples, entities, slots,
//! responses, custom actions, stories, rules and the pipeline config.
//!
//! A bundle is authored as five YAML files (see [`DocumentSet`]) and parsed
//! into an immutable, cross-referenced [`DomainSpec`].

mod lint;
mod markup;
mod parse;
mod serialize;
pub mod yaml;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use lint::{lint_domain, Warning, WarningKind};
pub use markup::{parse_annotated, render_annotated, MarkupError};
pub use parse::{parse_domain, parse_domain_with_warnings};
pub use serialize::serialize_domain;

/// Action that hands the turn back to the user.
pub const ACTION_LISTEN: &str = "action_listen";
/// Action run when NLU is unsure or no policy applies. Utters `utter_default`.
pub const ACTION_DEFAULT_FALLBACK: &str = "action_default_fallback";
/// Action that pauses the conversation until the wake word is heard again.
pub const ACTION_PAUSE: &str = "action_pause";
/// Pseudo-intent recorded for low-confidence utterances; usable as a rule trigger.
pub const INTENT_NLU_FALLBACK: &str = "nlu_fallback";
/// Response uttered by the fallback action.
pub const RESPONSE_DEFAULT: &str = "utter_default";
/// Response sent when the wake word opens a session.
pub const RESPONSE_WAKE: &str = "utter_wake";

pub const BUILTIN_ACTIONS: &[&str] = &[ACTION_LISTEN, ACTION_DEFAULT_FALLBACK, ACTION_PAUSE];
/// Responses used by the engine itself rather than by stories or rules.
pub const ENGINE_RESPONSES: &[&str] = &[RESPONSE_DEFAULT, RESPONSE_WAKE];

/// Entity span inside an example, in char offsets of the plain text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub entity: String,
}

/// One training example with its inline entity annotations removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub text: String,
    pub spans: Vec<EntitySpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentDef {
    pub name: String,
    pub examples: Vec<Example>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityDef {
    pub name: String,
    pub lookup: Vec<String>,
    pub patterns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Text,
    Bool,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Text => "text",
            SlotKind::Bool => "bool",
        }
    }
}

/// Value held by a slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotValue {
    Bool(bool),
    Text(String),
}

impl SlotValue {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            SlotValue::Text(s) => Some(s),
            SlotValue::Bool(_) => None,
        }
    }
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Bool(b) => write!(f, "{b}"),
            SlotValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for SlotValue {
    fn from(s: &str) -> Self {
        SlotValue::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDef {
    pub name: String,
    pub kind: SlotKind,
    pub fill_from: Option<String>,
    pub initial: Option<SlotValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseDef {
    pub name: String,
    pub variants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserStep {
    pub intent: String,
    /// Entity names that must be present in the utterance for the step to match.
    pub entities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    User(UserStep),
    Bot(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryDef {
    pub name: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDef {
    pub name: String,
    pub trigger: UserStep,
    pub then: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub char_ngram_range: (usize, usize),
    pub fallback_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.5,
            char_ngram_range: (3, 3),
            fallback_threshold: 0.3,
        }
    }
}

/// Parsed and validated domain bundle. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub intents: Vec<IntentDef>,
    pub entities: Vec<EntityDef>,
    pub slots: Vec<SlotDef>,
    pub responses: Vec<ResponseDef>,
    pub custom_action_names: Vec<String>,
    pub stories: Vec<StoryDef>,
    pub rules: Vec<RuleDef>,
    pub pipeline_config: PipelineConfig,
}

impl DomainSpec {
    pub fn intent(&self, name: &str) -> Option<&IntentDef> {
        self.intents.iter().find(|i| i.name == name)
    }

    pub fn entity(&self, name: &str) -> Option<&EntityDef> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn slot(&self, name: &str) -> Option<&SlotDef> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn response(&self, name: &str) -> Option<&ResponseDef> {
        self.responses.iter().find(|r| r.name == name)
    }

    pub fn rule_for(&self, intent: &str) -> Option<&RuleDef> {
        self.rules.iter().find(|r| r.trigger.intent == intent)
    }

    pub fn intent_names(&self) -> impl Iterator<Item = &str> {
        self.intents.iter().map(|i| i.name.as_str())
    }

    /// Every name a bot step may refer to: responses, custom actions and builtins.
    pub fn action_names(&self) -> BTreeSet<&str> {
        self.responses
            .iter()
            .map(|r| r.name.as_str())
            .chain(self.custom_action_names.iter().map(String::as_str))
            .chain(BUILTIN_ACTIONS.iter().copied())
            .collect()
    }

    pub fn is_custom_action(&self, name: &str) -> bool {
        self.custom_action_names.iter().any(|a| a == name)
    }
}

/// Source text of the five bundle files. Missing files are empty strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSet {
    pub domain: String,
    pub nlu: String,
    pub stories: String,
    pub rules: String,
    pub config: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Domain,
    Nlu,
    Stories,
    Rules,
    Config,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 5] = [
        DocumentKind::Domain,
        DocumentKind::Nlu,
        DocumentKind::Stories,
        DocumentKind::Rules,
        DocumentKind::Config,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            DocumentKind::Domain => "domain.yml",
            DocumentKind::Nlu => "nlu.yml",
            DocumentKind::Stories => "stories.yml",
            DocumentKind::Rules => "rules.yml",
            DocumentKind::Config => "config.yml",
        }
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name())
    }
}

impl DocumentSet {
    pub fn get(&self, kind: DocumentKind) -> &str {
        match kind {
            DocumentKind::Domain => &self.domain,
            DocumentKind::Nlu => &self.nlu,
            DocumentKind::Stories => &self.stories,
            DocumentKind::Rules => &self.rules,
            DocumentKind::Config => &self.config,
        }
    }

    pub fn get_mut(&mut self, kind: DocumentKind) -> &mut String {
        match kind {
            DocumentKind::Domain => &mut self.domain,
            DocumentKind::Nlu => &mut self.nlu,
            DocumentKind::Stories => &mut self.stories,
            DocumentKind::Rules => &mut self.rules,
            DocumentKind::Config => &mut self.config,
        }
    }

    /// Reads the five files from `dir`; absent files read as empty.
    pub fn read_dir(dir: &Path) -> io::Result<Self> {
        let mut set = DocumentSet::default();
        for kind in DocumentKind::ALL {
            let path = dir.join(kind.file_name());
            *set.get_mut(kind) = match fs::read_to_string(&path) {
                Ok(s) => s,
                Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
                Err(e) => return Err(e),
            };
        }
        Ok(set)
    }

    pub fn write_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for kind in DocumentKind::ALL {
            fs::write(dir.join(kind.file_name()), self.get(kind))?;
        }
        Ok(())
    }
}

/// Where a construct was declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub file: DocumentKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}:{column}: syntax error: {message}")]
pub struct SyntaxError {
    pub file: DocumentKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationKind {
    NoIntents,
    UnknownKey,
    MissingField,
    WrongType,
    InvalidIdentifier,
    DuplicateName,
    DanglingIntent,
    DanglingEntity,
    DanglingAction,
    DanglingSlot,
    MissingExamples,
    InvalidAnnotation,
    EmptyEntity,
    InvalidPattern,
    InvalidResponse,
    InvalidStory,
    InvalidRule,
    RuleTriggerCollision,
    InvalidConfig,
}

impl ValidationKind {
    pub fn describe(self) -> &'static str {
        match self {
            ValidationKind::NoIntents => "no intents declared",
            ValidationKind::UnknownKey => "unknown key",
            ValidationKind::MissingField => "missing field",
            ValidationKind::WrongType => "wrong value type",
            ValidationKind::InvalidIdentifier => "invalid identifier",
            ValidationKind::DuplicateName => "duplicate name",
            ValidationKind::DanglingIntent => "dangling intent reference",
            ValidationKind::DanglingEntity => "dangling entity reference",
            ValidationKind::DanglingAction => "dangling action reference",
            ValidationKind::DanglingSlot => "dangling slot reference",
            ValidationKind::MissingExamples => "intent has no examples",
            ValidationKind::InvalidAnnotation => "invalid entity annotation",
            ValidationKind::EmptyEntity => "entity has neither lookup values nor patterns",
            ValidationKind::InvalidPattern => "invalid entity pattern",
            ValidationKind::InvalidResponse => "invalid response",
            ValidationKind::InvalidStory => "invalid story",
            ValidationKind::InvalidRule => "invalid rule",
            ValidationKind::RuleTriggerCollision => "rule-trigger collision",
            ValidationKind::InvalidConfig => "invalid pipeline config",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub kind: ValidationKind,
    /// The offending name (empty when the error is not about a name).
    pub name: String,
    pub location: Option<Location>,
    pub detail: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(loc) = self.location {
            write!(f, "{loc}: ")?;
        }
        f.write_str(self.kind.describe())?;
        if !self.name.is_empty() {
            write!(f, " `{}`", self.name)?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{} validation error(s): {}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationError>),
}

impl DomainError {
    pub fn validation_errors(&self) -> &[ValidationError] {
        match self {
            DomainError::Invalid(v) => v,
            DomainError::Syntax(_) => &[],
        }
    }
}

/// `[a-z][a-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}
