use std::collections::{BTreeSet, HashMap, HashSet};

use regex::Regex;

use super::lint::{Warning, WarningKind};
use super::markup::parse_annotated;
use super::yaml::{self, Key, Node, NodeKind, ScalarStyle};
use super::*;

/// A story or rule: its name, where it was declared, and its positioned steps.
type NamedSteps = (String, yaml::Pos, Vec<(Step, yaml::Pos)>);

/// Parses and validates a bundle.
pub fn parse_domain(docs: &DocumentSet) -> Result<DomainSpec, DomainError> {
    parse_domain_with_warnings(docs).map(|(spec, _)| spec)
}

/// Like [`parse_domain`], also returning parse-time warnings (collapsed
/// duplicate examples).
pub fn parse_domain_with_warnings(docs: &DocumentSet) -> Result<(DomainSpec, Vec<Warning>), DomainError> {
    let mut roots = Vec::new();
    for kind in DocumentKind::ALL {
        let root = yaml::parse(docs.get(kind)).map_err(|e| SyntaxError {
            file: kind,
            line: e.pos.line,
            column: e.pos.column,
            message: e.message,
        })?;
        roots.push((kind, root));
    }
    let mut b = Builder::default();
    for (kind, root) in &roots {
        b.file = Some(*kind);
        b.document(root);
    }
    b.finish()
}

struct Decl<T> {
    value: T,
    loc: Location,
}

#[derive(Default)]
struct Builder {
    file: Option<DocumentKind>,
    errors: Vec<ValidationError>,
    warnings: Vec<Warning>,
    intents: Vec<Decl<String>>,
    examples: Vec<(Decl<String>, Vec<Decl<String>>)>,
    entities: Vec<Decl<EntityDef>>,
    slots: Vec<Decl<SlotDef>>,
    responses: Vec<Decl<ResponseDef>>,
    actions: Vec<Decl<String>>,
    stories: Vec<Decl<StoryDef>>,
    /// (is_story, item index, step index) -> location of that step.
    step_locs: HashMap<(bool, usize, usize), Location>,
    fill_locs: HashMap<usize, Location>,
    rules: Vec<Decl<RuleDef>>,
    config: PipelineConfig,
}

// Tiny helpers over the positioned tree.
fn scalar(node: &Node) -> Option<&str> {
    match &node.kind {
        NodeKind::Scalar(s, _) => Some(s),
        _ => None,
    }
}

impl Builder {
    fn loc(&self, pos: yaml::Pos) -> Location {
        Location {
            file: self.file.expect("file set"),
            line: pos.line,
            column: pos.column,
        }
    }

    fn error(&mut self, kind: ValidationKind, name: impl Into<String>, pos: yaml::Pos, detail: impl Into<String>) {
        let loc = self.loc(pos);
        self.errors.push(ValidationError {
            kind,
            name: name.into(),
            location: Some(loc),
            detail: detail.into(),
        });
    }

    fn wrong_type(&mut self, node: &Node, expected: &str, what: &str) {
        let detail = format!("expected {expected} for {what}, found {}", node.describe());
        self.error(ValidationKind::WrongType, "", node.pos, detail);
    }

    fn seq<'n>(&mut self, node: &'n Node, what: &str) -> &'n [Node] {
        match &node.kind {
            NodeKind::Seq(items) => items,
            NodeKind::Null => &[],
            _ => {
                self.wrong_type(node, "a sequence", what);
                &[]
            }
        }
    }

    fn map<'n>(&mut self, node: &'n Node, what: &str) -> &'n [(Key, Node)] {
        match &node.kind {
            NodeKind::Map(entries) => entries,
            NodeKind::Null => &[],
            _ => {
                self.wrong_type(node, "a mapping", what);
                &[]
            }
        }
    }

    fn string(&mut self, node: &Node, what: &str) -> Option<String> {
        match scalar(node) {
            Some(s) => Some(s.to_string()),
            None => {
                self.wrong_type(node, "a string", what);
                None
            }
        }
    }

    fn identifier(&mut self, name: &str, pos: yaml::Pos) -> bool {
        if is_identifier(name) {
            true
        } else {
            self.error(ValidationKind::InvalidIdentifier, name, pos, "identifiers match [a-z][a-z0-9_]*");
            false
        }
    }

    fn known_keys(&mut self, entries: &[(Key, Node)], allowed: &[&str], context: &str) {
        for (key, _) in entries {
            if !allowed.contains(&key.name.as_str()) {
                let detail = format!("{context} accepts: {}", allowed.join(", "));
                self.error(ValidationKind::UnknownKey, key.name.clone(), key.pos, detail);
            }
        }
    }

    fn document(&mut self, root: &Node) {
        let file = self.file.unwrap();
        let entries = self.map(root, &format!("the root of {file}"));
        let allowed: &[&str] = match file {
            DocumentKind::Domain => &["intents", "entities", "slots", "responses", "actions"],
            DocumentKind::Nlu => &["intents"],
            DocumentKind::Stories => &["stories"],
            DocumentKind::Rules => &["rules"],
            DocumentKind::Config => &["epochs", "learning_rate", "char_ngram_range", "fallback_threshold"],
        };
        self.known_keys(entries, allowed, &file.to_string());
        for (key, value) in entries {
            match (file, key.name.as_str()) {
                (DocumentKind::Domain, "intents") => self.domain_intents(value),
                (DocumentKind::Domain, "entities") => self.domain_entities(value),
                (DocumentKind::Domain, "slots") => self.domain_slots(value),
                (DocumentKind::Domain, "responses") => self.domain_responses(value),
                (DocumentKind::Domain, "actions") => self.domain_actions(value),
                (DocumentKind::Nlu, "intents") => self.nlu_intents(value),
                (DocumentKind::Stories, "stories") => self.stories(value),
                (DocumentKind::Rules, "rules") => self.rules(value),
                (DocumentKind::Config, _) => self.config_entry(key, value),
                _ => {}
            }
        }
    }

    fn domain_intents(&mut self, node: &Node) {
        for item in self.seq(node, "intents") {
            if let Some(name) = self.string(item, "an intent name") {
                if self.identifier(&name, item.pos) {
                    let loc = self.loc(item.pos);
                    self.intents.push(Decl { value: name, loc });
                }
            }
        }
    }

    fn domain_entities(&mut self, node: &Node) {
        for (key, body) in self.map(node, "entities") {
            if !self.identifier(&key.name, key.pos) {
                continue;
            }
            let fields = self.map(body, "an entity");
            self.known_keys(fields, &["lookup", "patterns"], "an entity");
            let mut def = EntityDef {
                name: key.name.clone(),
                lookup: Vec::new(),
                patterns: Vec::new(),
            };
            // Values that were present but rejected already have their own
            // error; the entity is only "empty" when nothing was written.
            let mut rejected = false;
            for (fkey, fval) in fields {
                match fkey.name.as_str() {
                    "lookup" => {
                        for v in self.seq(fval, "lookup values") {
                            if let Some(s) = self.string(v, "a lookup value") {
                                if s.trim().is_empty() {
                                    self.wrong_type(v, "a non-empty string", "a lookup value");
                                    rejected = true;
                                } else {
                                    def.lookup.push(s);
                                }
                            }
                        }
                    }
                    "patterns" => {
                        for v in self.seq(fval, "patterns") {
                            if let Some(s) = self.string(v, "a pattern") {
                                if let Err(e) = Regex::new(&s) {
                                    self.error(ValidationKind::InvalidPattern, key.name.clone(), v.pos, e.to_string());
                                    rejected = true;
                                } else {
                                    def.patterns.push(s);
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
            if def.lookup.is_empty() && def.patterns.is_empty() && !rejected {
                self.error(ValidationKind::EmptyEntity, key.name.clone(), key.pos, "");
            }
            let loc = self.loc(key.pos);
            self.entities.push(Decl { value: def, loc });
        }
    }

    fn domain_slots(&mut self, node: &Node) {
        for (key, body) in self.map(node, "slots") {
            if !self.identifier(&key.name, key.pos) {
                continue;
            }
            let fields = self.map(body, "a slot");
            self.known_keys(fields, &["type", "fill_from", "initial"], "a slot");
            let mut kind = None;
            let mut fill_from = None;
            let mut initial_node = None;
            for (fkey, fval) in fields {
                match fkey.name.as_str() {
                    "type" => match scalar(fval) {
                        Some("text") => kind = Some(SlotKind::Text),
                        Some("bool") => kind = Some(SlotKind::Bool),
                        _ => self.wrong_type(fval, "`text` or `bool`", "a slot type"),
                    },
                    "fill_from" => {
                        if let Some(s) = self.string(fval, "fill_from") {
                            fill_from = Some((s, fval.pos));
                        }
                    }
                    "initial" => initial_node = Some(fval),
                    _ => {}
                }
            }
            let Some(kind) = kind else {
                self.error(ValidationKind::MissingField, key.name.clone(), key.pos, "slot needs `type`");
                continue;
            };
            let initial = match (kind, initial_node.map(|n| &n.kind)) {
                (_, None) | (_, Some(NodeKind::Null)) => None,
                (SlotKind::Bool, Some(NodeKind::Scalar(s, ScalarStyle::Plain))) if s == "true" || s == "false" => {
                    Some(SlotValue::Bool(s == "true"))
                }
                (SlotKind::Text, Some(NodeKind::Scalar(s, _))) => Some(SlotValue::Text(s.clone())),
                _ => {
                    let n = initial_node.unwrap();
                    self.wrong_type(n, kind.as_str(), "a slot initial value");
                    None
                }
            };
            let loc = self.loc(key.pos);
            if let Some((_, pos)) = fill_from {
                let fill_loc = self.loc(pos);
                self.fill_locs.insert(self.slots.len(), fill_loc);
            }
            self.slots.push(Decl {
                value: SlotDef {
                    name: key.name.clone(),
                    kind,
                    fill_from: fill_from.map(|(s, _)| s),
                    initial,
                },
                loc,
            });
        }
    }

    fn domain_responses(&mut self, node: &Node) {
        for (key, body) in self.map(node, "responses") {
            if !self.identifier(&key.name, key.pos) {
                continue;
            }
            if !key.name.starts_with("utter_") {
                self.error(ValidationKind::InvalidResponse, key.name.clone(), key.pos, "response names start with `utter_`");
                continue;
            }
            let mut variants = Vec::new();
            for v in self.seq(body, "response variants") {
                if let Some(s) = self.string(v, "a response variant") {
                    variants.push(s);
                }
            }
            if variants.is_empty() {
                self.error(ValidationKind::InvalidResponse, key.name.clone(), key.pos, "at least one variant required");
                continue;
            }
            let loc = self.loc(key.pos);
            self.responses.push(Decl {
                value: ResponseDef {
                    name: key.name.clone(),
                    variants,
                },
                loc,
            });
        }
    }

    fn domain_actions(&mut self, node: &Node) {
        for item in self.seq(node, "actions") {
            if let Some(name) = self.string(item, "an action name") {
                if self.identifier(&name, item.pos) {
                    if BUILTIN_ACTIONS.contains(&name.as_str()) {
                        self.error(ValidationKind::DuplicateName, name, item.pos, "built-in action");
                        continue;
                    }
                    let loc = self.loc(item.pos);
                    self.actions.push(Decl { value: name, loc });
                }
            }
        }
    }

    fn nlu_intents(&mut self, node: &Node) {
        for (key, body) in self.map(node, "intent examples") {
            let mut examples = Vec::new();
            for v in self.seq(body, "examples") {
                if let Some(s) = self.string(v, "an example") {
                    let loc = self.loc(v.pos);
                    examples.push(Decl { value: s, loc });
                }
            }
            let loc = self.loc(key.pos);
            self.examples.push((
                Decl {
                    value: key.name.clone(),
                    loc,
                },
                examples,
            ));
        }
    }

    fn user_step(&mut self, fields: &[(Key, Node)], pos: yaml::Pos) -> Option<UserStep> {
        let mut intent = None;
        let mut entities = Vec::new();
        for (k, v) in fields {
            match k.name.as_str() {
                "intent" => intent = self.string(v, "an intent name"),
                "entities" => {
                    for e in self.seq(v, "step entities") {
                        if let Some(s) = self.string(e, "an entity name") {
                            entities.push(s);
                        }
                    }
                }
                _ => {}
            }
        }
        match intent {
            Some(intent) => Some(UserStep { intent, entities }),
            None => {
                self.error(ValidationKind::MissingField, "", pos, "step needs `intent` or `action`");
                None
            }
        }
    }

    /// Parses one step. `Ok(None)` means the step was malformed (already reported).
    fn step(&mut self, node: &Node) -> Option<Step> {
        let fields = self.map(node, "a step");
        let has_action = fields.iter().any(|(k, _)| k.name == "action");
        if has_action {
            self.known_keys(fields, &["action"], "a bot step");
            let (_, v) = fields.iter().find(|(k, _)| k.name == "action").unwrap();
            self.string(v, "an action name").map(Step::Bot)
        } else {
            if fields.is_empty() {
                self.error(ValidationKind::MissingField, "", node.pos, "step needs `intent` or `action`");
                return None;
            }
            self.known_keys(fields, &["intent", "entities"], "a user step");
            self.user_step(fields, node.pos).map(Step::User)
        }
    }

    fn named_steps(&mut self, node: &Node, tag: &str) -> Option<NamedSteps> {
        let fields = self.map(node, tag);
        self.known_keys(fields, &[tag, "steps"], tag);
        let name = fields.iter().find(|(k, _)| k.name == tag);
        let Some((_, name_node)) = name else {
            self.error(ValidationKind::MissingField, "", node.pos, format!("needs `{tag}`"));
            return None;
        };
        let name = self.string(name_node, &format!("a {tag} name"))?;
        if !self.identifier(&name, name_node.pos) {
            return None;
        }
        let mut steps = Vec::new();
        if let Some((_, steps_node)) = fields.iter().find(|(k, _)| k.name == "steps") {
            for s in self.seq(steps_node, "steps") {
                if let Some(step) = self.step(s) {
                    steps.push((step, s.pos));
                }
            }
        }
        Some((name, name_node.pos, steps))
    }

    fn stories(&mut self, node: &Node) {
        for item in self.seq(node, "stories") {
            let Some((name, pos, steps)) = self.named_steps(item, "story") else {
                continue;
            };
            match steps.first() {
                None => {
                    self.error(ValidationKind::InvalidStory, name, pos, "story has no steps");
                    continue;
                }
                Some((Step::Bot(_), spos)) => {
                    self.error(ValidationKind::InvalidStory, name, *spos, "first step must be a user step");
                    continue;
                }
                _ => {}
            }
            let idx = self.stories.len();
            for (i, (_, spos)) in steps.iter().enumerate() {
                let loc = self.loc(*spos);
                self.step_locs.insert((true, idx, i), loc);
            }
            let loc = self.loc(pos);
            self.stories.push(Decl {
                value: StoryDef {
                    name,
                    steps: steps.into_iter().map(|(s, _)| s).collect(),
                },
                loc,
            });
        }
    }

    fn rules(&mut self, node: &Node) {
        for item in self.seq(node, "rules") {
            let Some((name, pos, steps)) = self.named_steps(item, "rule") else {
                continue;
            };
            let mut iter = steps.into_iter();
            let trigger = match iter.next() {
                Some((Step::User(u), _)) => u,
                Some((Step::Bot(_), spos)) => {
                    self.error(ValidationKind::InvalidRule, name, spos, "rule must start with a user step");
                    continue;
                }
                None => {
                    self.error(ValidationKind::InvalidRule, name, pos, "rule has no steps");
                    continue;
                }
            };
            let idx = self.rules.len();
            let mut then = Vec::new();
            let mut ok = true;
            for (i, (step, spos)) in iter.enumerate() {
                match step {
                    Step::Bot(a) => {
                        let loc = self.loc(spos);
                        self.step_locs.insert((false, idx, i), loc);
                        then.push(a);
                    }
                    Step::User(_) => {
                        self.error(ValidationKind::InvalidRule, name.clone(), spos, "only the first rule step may be a user step");
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            if then.is_empty() {
                self.error(ValidationKind::InvalidRule, name, pos, "rule needs at least one action");
                continue;
            }
            let loc = self.loc(pos);
            self.rules.push(Decl {
                value: RuleDef { name, trigger, then },
                loc,
            });
        }
    }

    fn config_entry(&mut self, key: &Key, value: &Node) {
        let plain = match &value.kind {
            NodeKind::Scalar(s, ScalarStyle::Plain) => Some(s.as_str()),
            _ => None,
        };
        match key.name.as_str() {
            "epochs" => match plain.and_then(|s| s.parse::<usize>().ok()) {
                Some(n) if n >= 1 => self.config.epochs = n,
                Some(_) => self.error(ValidationKind::InvalidConfig, "epochs", value.pos, "epochs must be at least 1"),
                None => self.wrong_type(value, "a positive integer", "epochs"),
            },
            "learning_rate" => match plain.and_then(|s| s.parse::<f64>().ok()) {
                Some(x) if x.is_finite() && x > 0.0 => self.config.learning_rate = x,
                Some(_) => self.error(ValidationKind::InvalidConfig, "learning_rate", value.pos, "learning_rate must be positive"),
                None => self.wrong_type(value, "a number", "learning_rate"),
            },
            "fallback_threshold" => match plain.and_then(|s| s.parse::<f64>().ok()) {
                Some(x) if (0.0..=1.0).contains(&x) => self.config.fallback_threshold = x,
                Some(_) => self.error(ValidationKind::InvalidConfig, "fallback_threshold", value.pos, "fallback_threshold must lie in [0, 1]"),
                None => self.wrong_type(value, "a number", "fallback_threshold"),
            },
            "char_ngram_range" => {
                let bounds: Option<Vec<usize>> = match &value.kind {
                    NodeKind::Seq(items) if items.len() == 2 => items
                        .iter()
                        .map(|n| match &n.kind {
                            NodeKind::Scalar(s, ScalarStyle::Plain) => s.parse::<usize>().ok(),
                            _ => None,
                        })
                        .collect(),
                    _ => None,
                };
                match bounds.as_deref() {
                    Some(&[lo, hi]) if lo >= 1 && lo <= hi => self.config.char_ngram_range = (lo, hi),
                    Some(_) => self.error(
                        ValidationKind::InvalidConfig,
                        "char_ngram_range",
                        value.pos,
                        "range needs 1 <= min <= max",
                    ),
                    None => self.wrong_type(value, "a [min, max] pair of integers", "char_ngram_range"),
                }
            }
            _ => {}
        }
    }

    fn duplicates<'a>(&mut self, names: impl Iterator<Item = (&'a str, Location)>, what: &str) {
        let mut seen = HashSet::new();
        for (name, loc) in names {
            if !seen.insert(name) {
                self.errors.push(ValidationError {
                    kind: ValidationKind::DuplicateName,
                    name: name.to_string(),
                    location: Some(loc),
                    detail: format!("{what} declared twice"),
                });
            }
        }
    }

    fn finish(mut self) -> Result<(DomainSpec, Vec<Warning>), DomainError> {
        let intents: Vec<Decl<String>> = std::mem::take(&mut self.intents);
        let entities = std::mem::take(&mut self.entities);
        let slots = std::mem::take(&mut self.slots);
        let responses = std::mem::take(&mut self.responses);
        let actions = std::mem::take(&mut self.actions);
        let stories = std::mem::take(&mut self.stories);
        let rules = std::mem::take(&mut self.rules);
        let examples = std::mem::take(&mut self.examples);

        self.duplicates(intents.iter().map(|d| (d.value.as_str(), d.loc)), "intent");
        self.duplicates(entities.iter().map(|d| (d.value.name.as_str(), d.loc)), "entity");
        self.duplicates(slots.iter().map(|d| (d.value.name.as_str(), d.loc)), "slot");
        self.duplicates(
            responses
                .iter()
                .map(|d| (d.value.name.as_str(), d.loc))
                .chain(actions.iter().map(|d| (d.value.as_str(), d.loc))),
            "action or response",
        );
        self.duplicates(examples.iter().map(|(d, _)| (d.value.as_str(), d.loc)), "intent example block");
        self.duplicates(stories.iter().map(|d| (d.value.name.as_str(), d.loc)), "story");
        self.duplicates(rules.iter().map(|d| (d.value.name.as_str(), d.loc)), "rule");

        let intent_set: BTreeSet<&str> = intents.iter().map(|d| d.value.as_str()).collect();
        let entity_set: BTreeSet<&str> = entities.iter().map(|d| d.value.name.as_str()).collect();
        let slot_set: BTreeSet<&str> = slots.iter().map(|d| d.value.name.as_str()).collect();
        let action_set: BTreeSet<&str> = responses
            .iter()
            .map(|d| d.value.name.as_str())
            .chain(actions.iter().map(|d| d.value.as_str()))
            .chain(BUILTIN_ACTIONS.iter().copied())
            .collect();

        let mut dangling: Vec<ValidationError> = Vec::new();
        let mut dangle = |kind: ValidationKind, name: &str, loc: Location| {
            dangling.push(ValidationError {
                kind,
                name: name.to_string(),
                location: Some(loc),
                detail: String::new(),
            });
        };

        if intents.is_empty() {
            self.errors.push(ValidationError {
                kind: ValidationKind::NoIntents,
                name: String::new(),
                location: None,
                detail: String::new(),
            });
        }
        let check_intent = !intents.is_empty();

        // Examples per intent.
        let mut intent_defs: Vec<IntentDef> = Vec::new();
        let mut by_name: HashMap<&str, usize> = HashMap::new();
        for d in &intents {
            by_name.entry(d.value.as_str()).or_insert_with(|| {
                intent_defs.push(IntentDef {
                    name: d.value.clone(),
                    examples: Vec::new(),
                });
                intent_defs.len() - 1
            });
        }
        let mut has_block: HashSet<&str> = HashSet::new();
        for (head, exs) in &examples {
            let idx = by_name.get(head.value.as_str()).copied();
            if idx.is_none() && check_intent {
                dangle(ValidationKind::DanglingIntent, &head.value, head.loc);
            }
            has_block.insert(head.value.as_str());
            for ex in exs {
                let parsed = match parse_annotated(&ex.value) {
                    Ok(p) => p,
                    Err(e) => {
                        self.errors.push(ValidationError {
                            kind: ValidationKind::InvalidAnnotation,
                            name: head.value.clone(),
                            location: Some(ex.loc),
                            detail: e.to_string(),
                        });
                        continue;
                    }
                };
                if parsed.text.trim().is_empty() {
                    self.errors.push(ValidationError {
                        kind: ValidationKind::InvalidAnnotation,
                        name: head.value.clone(),
                        location: Some(ex.loc),
                        detail: "empty example".into(),
                    });
                    continue;
                }
                for span in &parsed.spans {
                    if !entity_set.contains(span.entity.as_str()) {
                        dangle(ValidationKind::DanglingEntity, &span.entity, ex.loc);
                    }
                }
                if let Some(i) = idx {
                    let def = &mut intent_defs[i];
                    if def.examples.iter().any(|e| e.text == parsed.text && e.spans == parsed.spans) {
                        self.warnings.push(Warning {
                            kind: WarningKind::DuplicateExample,
                            name: head.value.clone(),
                            message: format!("duplicate example {:?} collapsed", ex.value),
                        });
                    } else {
                        def.examples.push(parsed);
                    }
                }
            }
        }
        for d in &intents {
            let name = d.value.as_str();
            let empty = intent_defs[by_name[name]].examples.is_empty();
            if empty && !self.errors.iter().any(|e| e.kind == ValidationKind::InvalidAnnotation && e.name == name) {
                let detail = if has_block.contains(name) { "example list is empty" } else { "no examples in nlu.yml" };
                self.errors.push(ValidationError {
                    kind: ValidationKind::MissingExamples,
                    name: name.to_string(),
                    location: Some(d.loc),
                    detail: detail.into(),
                });
            }
        }

        for (i, d) in slots.iter().enumerate() {
            if let Some(entity) = &d.value.fill_from {
                if !entity_set.contains(entity.as_str()) {
                    let loc = self.fill_locs.get(&i).copied().unwrap_or(d.loc);
                    dangle(ValidationKind::DanglingEntity, entity, loc);
                }
            }
        }

        let placeholder = Regex::new(r"\{([^{}]*)\}").unwrap();
        for d in &responses {
            for variant in &d.value.variants {
                for cap in placeholder.captures_iter(variant) {
                    let name = &cap[1];
                    if !is_identifier(name) {
                        self.errors.push(ValidationError {
                            kind: ValidationKind::InvalidResponse,
                            name: d.value.name.clone(),
                            location: Some(d.loc),
                            detail: format!("bad placeholder {{{name}}}"),
                        });
                    } else if !slot_set.contains(name) {
                        dangle(ValidationKind::DanglingSlot, name, d.loc);
                    }
                }
            }
        }

        let check_user = |step: &UserStep, loc: Location, dangle: &mut dyn FnMut(ValidationKind, &str, Location)| {
            if check_intent && step.intent != INTENT_NLU_FALLBACK && !intent_set.contains(step.intent.as_str()) {
                dangle(ValidationKind::DanglingIntent, &step.intent, loc);
            }
            for e in &step.entities {
                if !entity_set.contains(e.as_str()) {
                    dangle(ValidationKind::DanglingEntity, e, loc);
                }
            }
        };
        for (si, d) in stories.iter().enumerate() {
            for (i, step) in d.value.steps.iter().enumerate() {
                let loc = self.step_locs.get(&(true, si, i)).copied().unwrap_or(d.loc);
                match step {
                    Step::User(u) => check_user(u, loc, &mut dangle),
                    Step::Bot(a) => {
                        if !action_set.contains(a.as_str()) {
                            dangle(ValidationKind::DanglingAction, a, loc);
                        }
                    }
                }
            }
        }
        let mut triggers: HashMap<&str, &str> = HashMap::new();
        for (ri, d) in rules.iter().enumerate() {
            check_user(&d.value.trigger, d.loc, &mut dangle);
            for (i, a) in d.value.then.iter().enumerate() {
                if !action_set.contains(a.as_str()) {
                    let loc = self.step_locs.get(&(false, ri, i)).copied().unwrap_or(d.loc);
                    dangle(ValidationKind::DanglingAction, a, loc);
                }
            }
            let trig = d.value.trigger.intent.as_str();
            if let Some(first) = triggers.insert(trig, &d.value.name) {
                triggers.insert(trig, first);
                self.errors.push(ValidationError {
                    kind: ValidationKind::RuleTriggerCollision,
                    name: trig.to_string(),
                    location: Some(d.loc),
                    detail: format!("rules `{first}` and `{}` share a trigger", d.value.name),
                });
            }
        }

        // One error per missing name, at its first reference.
        let mut seen = HashSet::new();
        for e in dangling {
            if seen.insert((e.kind, e.name.clone())) {
                self.errors.push(e);
            }
        }

        if !self.errors.is_empty() {
            let mut errors = self.errors;
            errors.sort_by_key(|e| e.location);
            return Err(DomainError::Invalid(errors));
        }

        let spec = DomainSpec {
            intents: intent_defs,
            entities: entities.into_iter().map(|d| d.value).collect(),
            slots: slots.into_iter().map(|d| d.value).collect(),
            responses: responses.into_iter().map(|d| d.value).collect(),
            custom_action_names: actions.into_iter().map(|d| d.value).collect(),
            stories: stories.into_iter().map(|d| d.value).collect(),
            rules: rules.into_iter().map(|d| d.value).collect(),
            pipeline_config: self.config,
        };
        Ok((spec, self.warnings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(domain: &str, nlu: &str, stories: &str, rules: &str) -> DocumentSet {
        DocumentSet {
            domain: domain.into(),
            nlu: nlu.into(),
            stories: stories.into(),
            rules: rules.into(),
            config: String::new(),
        }
    }

    const DOMAIN: &str = "\
intents:
  - greet
  - goodbye
responses:
  utter_greet:
    - \"Hello!\"
  utter_goodbye:
    - \"Bye\"
";
    const NLU: &str = "\
intents:
  greet:
    - \"hello\"
    - \"hi\"
    - \"hey\"
  goodbye:
    - \"bye\"
";

    fn single_error(d: &DocumentSet) -> ValidationError {
        let err = parse_domain(d).unwrap_err();
        let errs = err.validation_errors();
        assert_eq!(errs.len(), 1, "{errs:?}");
        errs[0].clone()
    }

    #[test]
    fn greet_with_three_examples() {
        let spec = parse_domain(&docs(DOMAIN, NLU, "", "")).unwrap();
        assert_eq!(spec.intents.len(), 2);
        let greet = spec.intent("greet").unwrap();
        let texts: Vec<_> = greet.examples.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(texts, ["hello", "hi", "hey"]);
        assert_eq!(spec.pipeline_config, PipelineConfig::default());
    }

    #[test]
    fn empty_document_has_no_intents() {
        let e = single_error(&DocumentSet::default());
        assert_eq!(e.kind, ValidationKind::NoIntents);
        assert_eq!(e.to_string(), "no intents declared");
    }

    #[test]
    fn dangling_action_in_story() {
        let stories = "stories:\n  - story: s\n    steps:\n      - intent: greet\n      - action: action_x\n";
        let e = single_error(&docs(DOMAIN, NLU, stories, ""));
        assert_eq!(e.kind, ValidationKind::DanglingAction);
        assert_eq!(e.name, "action_x");
        assert!(e.to_string().contains("dangling action reference"));
        let loc = e.location.unwrap();
        assert_eq!((loc.file, loc.line, loc.column), (DocumentKind::Stories, 5, 9));
    }

    #[test]
    fn rule_trigger_collision() {
        let rules = "\
rules:
  - rule: a
    steps:
      - intent: greet
      - action: utter_greet
  - rule: b
    steps:
      - intent: greet
      - action: utter_goodbye
";
        let e = single_error(&docs(DOMAIN, NLU, "", rules));
        assert_eq!(e.kind, ValidationKind::RuleTriggerCollision);
        assert_eq!(e.name, "greet");
    }

    #[test]
    fn unknown_top_level_key() {
        let e = single_error(&docs(&format!("{DOMAIN}intnets:\n  - x\n"), NLU, "", ""));
        assert_eq!(e.kind, ValidationKind::UnknownKey);
        assert_eq!(e.name, "intnets");
    }

    #[test]
    fn duplicate_intent() {
        let e = single_error(&docs(&DOMAIN.replace("  - goodbye", "  - goodbye\n  - greet"), NLU, "", ""));
        assert_eq!(e.kind, ValidationKind::DuplicateName);
        assert_eq!(e.name, "greet");
    }

    #[test]
    fn bad_identifier() {
        let err = parse_domain(&docs(&DOMAIN.replace("  - goodbye", "  - Goodbye"), NLU, "", "")).unwrap_err();
        let kinds: Vec<_> = err.validation_errors().iter().map(|e| (e.kind, e.name.as_str())).collect();
        assert_eq!(
            kinds,
            [(ValidationKind::InvalidIdentifier, "Goodbye"), (ValidationKind::DanglingIntent, "goodbye")]
        );
    }

    #[test]
    fn annotations_must_resolve() {
        let nlu = NLU.replace("\"hey\"", "\"hey [John](person)\"");
        let e = single_error(&docs(DOMAIN, &nlu, "", ""));
        assert_eq!(e.kind, ValidationKind::DanglingEntity);
        assert_eq!(e.name, "person");
    }

    #[test]
    fn placeholders_must_name_slots() {
        let domain = DOMAIN.replace("\"Hello!\"", "\"Hello {name}!\"");
        let e = single_error(&docs(&domain, NLU, "", ""));
        assert_eq!(e.kind, ValidationKind::DanglingSlot);
        assert_eq!(e.name, "name");
    }

    #[test]
    fn duplicate_examples_collapse_with_warning() {
        let nlu = NLU.replace("    - \"hey\"", "    - \"hey\"\n    - \"hi\"");
        let (spec, warnings) = parse_domain_with_warnings(&docs(DOMAIN, &nlu, "", "")).unwrap();
        assert_eq!(spec.intent("greet").unwrap().examples.len(), 3);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].kind, WarningKind::DuplicateExample);
    }

    #[test]
    fn syntax_errors_name_the_file() {
        let err = parse_domain(&docs(DOMAIN, "intents:\n  greet: [hello\n", "", "")).unwrap_err();
        match err {
            DomainError::Syntax(s) => {
                assert_eq!(s.file, DocumentKind::Nlu);
                assert_eq!((s.line, s.column), (2, 10));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_values_and_errors() {
        let mut d = docs(DOMAIN, NLU, "", "");
        d.config = "epochs: 7\nlearning_rate: 0.25\nchar_ngram_range: [2, 4]\nfallback_threshold: 0.4\n".into();
        let spec = parse_domain(&d).unwrap();
        assert_eq!(
            spec.pipeline_config,
            PipelineConfig {
                epochs: 7,
                learning_rate: 0.25,
                char_ngram_range: (2, 4),
                fallback_threshold: 0.4
            }
        );
        d.config = "char_ngram_range: [4, 2]\n".into();
        assert_eq!(single_error(&d).kind, ValidationKind::InvalidConfig);
        d.config = "epochs: 0\n".into();
        assert_eq!(single_error(&d).kind, ValidationKind::InvalidConfig);
    }
}
