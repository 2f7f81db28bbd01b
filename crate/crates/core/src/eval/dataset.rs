//! Eval set (`eval.yml`) and conversation script (`scripts/*.yml`) files.
//!
//! ```yaml
//! utterances:
//!   - text: "what's the weather"
//!     intent: weather_request
//! ```
//!
//! ```yaml
//! module: weather
//! story: weather          # optional: story whose bot steps the script replays
//! turns:
//!   - "coffee"
//!   - "what's the weather"
//! ```

use serde::{Deserialize, Serialize};

use super::Module;
use crate::domain::yaml::{self, Node, NodeKind, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUtterance {
    pub text: String,
    pub expected_intent: String,
}

impl LabeledUtterance {
    pub fn new(text: impl Into<String>, expected_intent: impl Into<String>) -> Self {
        LabeledUtterance {
            text: text.into(),
            expected_intent: expected_intent.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("utterance {index} expects unknown intent `{intent}`")]
    UnknownIntent { index: usize, intent: String },
}

fn bad(node: &Node, message: impl Into<String>) -> DatasetError {
    DatasetError::Syntax {
        pos: node.pos,
        message: message.into(),
    }
}

fn entries<'n>(node: &'n Node, what: &str) -> Result<&'n [(yaml::Key, Node)], DatasetError> {
    match &node.kind {
        NodeKind::Map(m) => Ok(m),
        _ => Err(bad(node, format!("expected a mapping for {what}, found {}", node.describe()))),
    }
}

fn items<'n>(node: &'n Node, what: &str) -> Result<&'n [Node], DatasetError> {
    match &node.kind {
        NodeKind::Seq(s) => Ok(s),
        NodeKind::Null => Ok(&[]),
        _ => Err(bad(node, format!("expected a list for {what}, found {}", node.describe()))),
    }
}

fn text(node: &Node, what: &str) -> Result<String, DatasetError> {
    match &node.kind {
        NodeKind::Scalar(s, _) => Ok(s.clone()),
        NodeKind::Null => Ok(String::new()),
        _ => Err(bad(node, format!("expected a string for {what}, found {}", node.describe()))),
    }
}

fn field<'n>(map: &'n [(yaml::Key, Node)], owner: &Node, key: &str) -> Result<&'n Node, DatasetError> {
    map.iter()
        .find(|(k, _)| k.name == key)
        .map(|(_, v)| v)
        .ok_or_else(|| bad(owner, format!("missing `{key}`")))
}

fn only_keys(map: &[(yaml::Key, Node)], allowed: &[&str]) -> Result<(), DatasetError> {
    match map.iter().find(|(k, _)| !allowed.contains(&k.name.as_str())) {
        Some((k, _)) => Err(DatasetError::Syntax {
            pos: k.pos,
            message: format!("unknown key `{}`", k.name),
        }),
        None => Ok(()),
    }
}

fn document(src: &str) -> Result<Node, DatasetError> {
    yaml::parse(src).map_err(|e| DatasetError::Syntax {
        pos: e.pos,
        message: e.message,
    })
}

pub fn parse_eval_set(src: &str) -> Result<Vec<LabeledUtterance>, DatasetError> {
    let root = document(src)?;
    let top = entries(&root, "the eval set")?;
    only_keys(top, &["utterances"])?;
    let mut out = Vec::new();
    for item in items(field(top, &root, "utterances")?, "utterances")? {
        let m = entries(item, "an utterance")?;
        only_keys(m, &["text", "intent"])?;
        out.push(LabeledUtterance {
            text: text(field(m, item, "text")?, "text")?,
            expected_intent: text(field(m, item, "intent")?, "intent")?,
        });
    }
    if out.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub module: Module,
    pub story: Option<String>,
    pub turns: Vec<String>,
}

pub fn parse_script(src: &str) -> Result<Script, DatasetError> {
    let root = document(src)?;
    let top = entries(&root, "a script")?;
    only_keys(top, &["module", "story", "turns"])?;
    let module_node = field(top, &root, "module")?;
    let module_name = text(module_node, "module")?;
    let module = Module::from_name(&module_name).ok_or_else(|| bad(module_node, format!("unknown module `{module_name}`")))?;
    let story = match top.iter().find(|(k, _)| k.name == "story") {
        Some((_, v)) => Some(text(v, "story")?),
        None => None,
    };
    let turns = items(field(top, &root, "turns")?, "turns")?
        .iter()
        .map(|t| text(t, "a turn"))
        .collect::<Result<Vec<_>, _>>()?;
    if turns.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(Script { module, story, turns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_set_parses() {
        let set = parse_eval_set("utterances:\n  - text: \"hi\"\n    intent: greet\n  - text: Mumbai\n    intent: inform_location\n").unwrap();
        assert_eq!(set, vec![LabeledUtterance::new("hi", "greet"), LabeledUtterance::new("Mumbai", "inform_location")]);
        assert_eq!(parse_eval_set("utterances: []\n"), Err(DatasetError::Empty));
        assert!(matches!(
            parse_eval_set("utterances:\n  - text: hi\n    intnet: greet\n"),
            Err(DatasetError::Syntax { .. })
        ));
    }

    #[test]
    fn script_parses() {
        let s = parse_script("module: weather\nstory: weather\nturns:\n  - coffee\n  - \"what's the weather\"\n").unwrap();
        assert_eq!(s.module, Module::Weather);
        assert_eq!(s.story.as_deref(), Some("weather"));
        assert_eq!(s.turns.len(), 2);
        assert!(parse_script("module: cooking\nturns:\n  - x\n").is_err());
    }
}
