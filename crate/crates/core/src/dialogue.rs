//! Dialogue sessions over a mental model.
//!
//! A session opens by presenting the AI system's output entity. The user then
//! asks `why <entity>.<attribute>` (answered with a tier of entity-entity
//! relations) or `how rel:<n>` (answered with the models behind a presented
//! relation). Relations get transcript-local labels `rel:1`, `rel:2`, ... in
//! presentation order.
//!
//! By default questions may only target the root output, entities that took
//! part in a presented relation, and presented relations.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{
    AttributePattern, Entity, EntityId, MentalModel, ModelId, ModelOf, RelationId,
};
use crate::search::{
    explain_entity, explain_relation, EntityAnswer, EntityQuestion, PresentedSet,
    RelationQuestion, SearchError,
};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at column {position}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogueError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no entity is named `{0}`")]
    UnknownEntity(String),
    #[error("`{0}` has not been presented in this dialogue yet")]
    TargetNotYetPresented(String),
    #[error("the mental model has no root output to present")]
    NoRootOutput,
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// A user question, either parsed from text or received as JSON
/// (`{"type": "why", "target": "a", "attribute": "truth"}`,
/// `{"type": "how", "target": "rel:1"}`, `{"type": "reset"}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Question {
    Why { target: String, attribute: String },
    How {
        #[serde(rename = "target", with = "relation_label")]
        label: u32,
    },
    Reset,
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Question::Why { target, attribute } => write!(f, "why {target}.{attribute}"),
            Question::How { label } => write!(f, "how rel:{label}"),
            Question::Reset => f.write_str("reset"),
        }
    }
}

mod relation_label {
    use super::*;

    pub fn serialize<S: Serializer>(label: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("rel:{label}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(n) => Ok(n),
            Raw::Text(s) => parse_relation_ref(&s, 1).map_err(serde::de::Error::custom),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses `rel:<n>` (spaces around `:` allowed). `offset` is the column of
/// the first character, for error positions.
fn parse_relation_ref(text: &str, offset: usize) -> Result<u32, ParseError> {
    let err = |position, message: &str| ParseError {
        position,
        message: message.to_owned(),
    };
    let trimmed = text.trim_start();
    let start = offset + (text.chars().count() - trimmed.chars().count());
    let Some(rest) = trimmed.strip_prefix("rel") else {
        return Err(err(start, "expected a relation reference `rel:<n>`"));
    };
    let Some(number) = rest.trim_start().strip_prefix(':') else {
        return Err(err(start + 3, "expected `:` in the relation reference"));
    };
    let number = number.trim();
    match number.parse::<u32>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(err(start, "relation labels are positive integers, as in `rel:1`")),
    }
}

/// Parses the dialogue text grammar:
///
/// ```text
/// why <entity-name>.<attribute>
/// how rel:<n>
/// reset
/// ```
pub fn parse_question(text: &str) -> Result<Question, ParseError> {
    let leading = text.chars().take_while(|c| c.is_whitespace()).count();
    let body: String = text.chars().skip(leading).collect();
    let verb: String = body.chars().take_while(|c| !c.is_whitespace()).collect();
    let verb_len = verb.chars().count();
    let rest: String = body.chars().skip(verb_len).collect();
    let rest_offset = leading + verb_len + 1;
    let err = |position, message: String| ParseError { position, message };
    match verb.as_str() {
        "" => Err(err(leading + 1, "expected a question: why, how or reset".into())),
        "why" => {
            let Some(dot) = rest.rfind('.') else {
                return Err(err(
                    rest_offset + rest.chars().count(),
                    "expected `<entity>.<attribute>` after `why`".into(),
                ));
            };
            let entity = rest[..dot].trim();
            let attribute = rest[dot + 1..].trim();
            let dot_col = rest_offset + rest[..dot].chars().count();
            if entity.is_empty() {
                return Err(err(dot_col, "missing entity name before `.`".into()));
            }
            if !is_identifier(attribute) {
                return Err(err(dot_col + 1, format!("`{attribute}` is not an attribute name")));
            }
            Ok(Question::Why {
                target: entity.to_owned(),
                attribute: attribute.to_owned(),
            })
        }
        "how" => Ok(Question::How {
            label: parse_relation_ref(&rest, rest_offset)?,
        }),
        "reset" => {
            if rest.trim().is_empty() {
                Ok(Question::Reset)
            } else {
                Err(err(rest_offset, "`reset` takes no argument".into()))
            }
        }
        other => Err(err(
            leading + 1,
            format!("unknown question `{other}`; ask `why <entity>.<attribute>`, `how rel:<n>` or `reset`"),
        )),
    }
}

/// Question side of a transcript turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TurnQuestion {
    /// Opening presentation of the root output.
    Start { target: String },
    Why { target: String, attribute: String },
    How { target: String },
    Reset,
}

impl From<&Question> for TurnQuestion {
    fn from(q: &Question) -> Self {
        match q {
            Question::Why { target, attribute } => TurnQuestion::Why {
                target: target.clone(),
                attribute: attribute.clone(),
            },
            Question::How { label } => TurnQuestion::How {
                target: format!("rel:{label}"),
            },
            Question::Reset => TurnQuestion::Reset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityRef {
    pub id: EntityId,
    pub kind: String,
    pub name: String,
}

impl EntityRef {
    fn new(mm: &MentalModel, entity: &Entity) -> Self {
        Self {
            id: entity.id,
            kind: mm.entity_kind(entity).name.clone(),
            name: entity.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityView {
    pub id: EntityId,
    pub kind: String,
    pub name: String,
    /// Placeholder values merged with the kind's constants.
    pub attributes: BTreeMap<String, Value>,
}

impl EntityView {
    pub fn new(mm: &MentalModel, entity: &Entity) -> Self {
        let kind = mm.entity_kind(entity);
        let mut attributes = kind.constants.clone();
        attributes.extend(entity.attributes.clone());
        Self {
            id: entity.id,
            kind: kind.name.clone(),
            name: entity.name.clone(),
            attributes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationView {
    pub label: String,
    pub id: RelationId,
    pub template: String,
    pub reason: String,
    pub priority: i64,
    pub explanan: EntityRef,
    pub explanandum: EntityRef,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelView {
    pub id: ModelId,
    pub name: String,
    pub story: String,
    pub model_of: ModelOf,
    pub context: Vec<AttributePattern>,
    pub result: Vec<AttributePattern>,
}

/// Answer side of a transcript turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "answer_kind", content = "payload")]
pub enum Answer {
    #[serde(rename = "presentation")]
    Presentation { entity: EntityView },
    #[serde(rename = "tier")]
    Tier {
        entity: EntityRef,
        attribute: String,
        relations: Vec<RelationView>,
    },
    #[serde(rename = "models")]
    Models { relation: String, models: Vec<ModelView> },
    #[serde(rename = "no_matching_model")]
    NoMatchingModel { relation: String },
    #[serde(rename = "exhausted")]
    Exhausted { entity: EntityRef, attribute: String },
    #[serde(rename = "acknowledgement")]
    Acknowledgement { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnRecord {
    /// 1-based position in the transcript.
    pub n: usize,
    pub question: TurnQuestion,
    #[serde(flatten)]
    pub answer: Answer,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    /// Restrict question targets to what the dialogue has presented.
    pub scoped: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self { scoped: true }
    }
}

/// One explanation dialogue. Single writer; distinct sessions may share a
/// mental model across threads.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    mm: Arc<MentalModel>,
    root_output: EntityId,
    options: SessionOptions,
    presented: PresentedSet,
    transcript: Vec<TurnRecord>,
    labels: Vec<RelationId>,
    label_of: HashMap<RelationId, u32>,
    reachable: HashSet<EntityId>,
}

/// Opens a session presenting `root_output`.
pub fn start_session(mm: Arc<MentalModel>, root_output: EntityId) -> Result<Session, DialogueError> {
    Session::start(mm, root_output, SessionOptions::default())
}

impl Session {
    pub fn start(
        mm: Arc<MentalModel>,
        root_output: EntityId,
        options: SessionOptions,
    ) -> Result<Session, DialogueError> {
        let root = mm
            .entity(root_output)
            .ok_or(SearchError::UnknownEntity(root_output))?;
        let view = EntityView::new(&mm, root);
        let first = TurnRecord {
            n: 1,
            question: TurnQuestion::Start {
                target: root.name.clone(),
            },
            answer: Answer::Presentation { entity: view },
            timestamp: now_millis(),
        };
        Ok(Session {
            id: uuid::Uuid::new_v4().to_string(),
            root_output,
            options,
            presented: PresentedSet::new(),
            transcript: vec![first],
            labels: Vec::new(),
            label_of: HashMap::new(),
            reachable: HashSet::from([root_output]),
            mm,
        })
    }

    /// Opens a session on the mental model's own root output.
    pub fn start_at_root(mm: Arc<MentalModel>, options: SessionOptions) -> Result<Session, DialogueError> {
        let root = mm.root_output().ok_or(DialogueError::NoRootOutput)?;
        Session::start(mm, root, options)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mental_model(&self) -> &Arc<MentalModel> {
        &self.mm
    }

    pub fn root_output(&self) -> EntityId {
        self.root_output
    }

    pub fn presented(&self) -> &PresentedSet {
        &self.presented
    }

    /// The transcript so far, oldest turn first.
    pub fn history(&self) -> &[TurnRecord] {
        &self.transcript
    }

    /// Transcript as a JSON array of `{n, question, answer_kind, payload, timestamp}`.
    pub fn export_transcript(&self) -> String {
        serde_json::to_string_pretty(&self.transcript).expect("transcript encodes")
    }

    /// Relation for a transcript label, if it has been presented.
    pub fn relation_for_label(&self, label: u32) -> Option<RelationId> {
        label
            .checked_sub(1)
            .and_then(|i| self.labels.get(i as usize))
            .copied()
    }

    /// `(label, relation)` pairs in presentation order.
    pub fn labelled_relations(&self) -> impl Iterator<Item = (u32, RelationId)> + '_ {
        self.labels.iter().enumerate().map(|(i, &r)| (i as u32 + 1, r))
    }

    /// Entities a scoped question may target, in id order.
    pub fn addressable_entities(&self) -> Vec<&Entity> {
        let mut ids: Vec<EntityId> = self.reachable.iter().copied().collect();
        ids.sort_unstable();
        ids.into_iter().filter_map(|id| self.mm.entity(id)).collect()
    }

    pub fn ask(&mut self, text: &str) -> Result<&TurnRecord, DialogueError> {
        let question = parse_question(text)?;
        self.ask_question(&question)
    }

    pub fn ask_question(&mut self, question: &Question) -> Result<&TurnRecord, DialogueError> {
        let answer = match question {
            Question::Why { target, attribute } => self.answer_why(target, attribute)?,
            Question::How { label } => self.answer_how(*label)?,
            Question::Reset => {
                self.presented.clear();
                Answer::Acknowledgement {
                    message: "presented relations cleared; questions will be answered afresh".into(),
                }
            }
        };
        self.transcript.push(TurnRecord {
            n: self.transcript.len() + 1,
            question: question.into(),
            answer,
            timestamp: now_millis(),
        });
        Ok(self.transcript.last().expect("just pushed"))
    }

    fn resolve_entity(&self, name: &str) -> Result<&Entity, DialogueError> {
        let mut candidates = self.mm.entities().iter().filter(|e| e.name == name).peekable();
        if candidates.peek().is_none() {
            return Err(DialogueError::UnknownEntity(name.to_owned()));
        }
        if !self.options.scoped {
            return Ok(candidates.next().expect("peeked"));
        }
        candidates
            .find(|e| self.reachable.contains(&e.id))
            .ok_or_else(|| DialogueError::TargetNotYetPresented(name.to_owned()))
    }

    fn relation_view(&self, id: RelationId) -> RelationView {
        let mm = &self.mm;
        let relation = mm.relation(id).expect("presented relation exists");
        let template = mm.template(relation.template);
        let entity = |id| EntityRef::new(mm, mm.entity(id).expect("relation endpoint exists"));
        RelationView {
            label: format!("rel:{}", self.label_of[&id]),
            id,
            template: template.name.clone(),
            reason: template.reason.clone(),
            priority: template.priority,
            explanan: entity(relation.explanan),
            explanandum: entity(relation.explanandum),
        }
    }

    fn answer_why(&mut self, target: &str, attribute: &str) -> Result<Answer, DialogueError> {
        let entity = self.resolve_entity(target)?;
        let entity_ref = EntityRef::new(&self.mm, entity);
        let question = EntityQuestion::new(entity.id, attribute);
        let mm = Arc::clone(&self.mm);
        match explain_entity(&mm, &mut self.presented, &question)? {
            EntityAnswer::Exhausted => Ok(Answer::Exhausted {
                entity: entity_ref,
                attribute: attribute.to_owned(),
            }),
            EntityAnswer::Tier(tier) => {
                for &id in &tier {
                    if !self.label_of.contains_key(&id) {
                        self.labels.push(id);
                        self.label_of.insert(id, self.labels.len() as u32);
                    }
                    let relation = mm.relation(id).expect("tier relation exists");
                    self.reachable.insert(relation.explanan);
                    self.reachable.insert(relation.explanandum);
                }
                Ok(Answer::Tier {
                    entity: entity_ref,
                    attribute: attribute.to_owned(),
                    relations: tier.into_iter().map(|id| self.relation_view(id)).collect(),
                })
            }
        }
    }

    fn answer_how(&self, label: u32) -> Result<Answer, DialogueError> {
        let reference = format!("rel:{label}");
        let relation = self
            .relation_for_label(label)
            .ok_or_else(|| DialogueError::TargetNotYetPresented(reference.clone()))?;
        match explain_relation(&self.mm, &RelationQuestion { relation }) {
            Ok(models) => Ok(Answer::Models {
                relation: reference,
                models: models
                    .into_iter()
                    .map(|id| {
                        let m = self.mm.model(id).expect("matched model exists");
                        ModelView {
                            id,
                            name: m.name.clone(),
                            story: m.story.clone(),
                            model_of: m.model_of.clone(),
                            context: m.context.clone(),
                            result: m.result.clone(),
                        }
                    })
                    .collect(),
            }),
            Err(SearchError::NoMatchingModel(_)) => Ok(Answer::NoMatchingModel { relation: reference }),
            Err(e) => Err(e.into()),
        }
    }
}

/// Rebuilds the presented set implied by a transcript: the union of the tiers
/// returned since the last reset.
pub fn presented_from_transcript(transcript: &[TurnRecord]) -> PresentedSet {
    let mut presented = PresentedSet::new();
    for turn in transcript {
        match &turn.answer {
            Answer::Tier {
                entity,
                attribute,
                relations,
            } => {
                let ids: Vec<RelationId> = relations.iter().map(|r| r.id).collect();
                presented.record(&EntityQuestion::new(entity.id, attribute), &ids);
            }
            Answer::Acknowledgement { .. } => presented.clear(),
            _ => {}
        }
    }
    presented
}
