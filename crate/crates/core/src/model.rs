//! The mental-model store: kinds, entities, entity-entity relations and
//! models, plus the two lookup indices the explanation search runs on.
//!
//! A [`MentalModel`] is assembled through a [`MentalModelBuilder`], which
//! validates every insertion, and is immutable once [`MentalModelBuilder::finish`]
//! returns it. Identifiers are sequential and follow insertion order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Value, ValueType};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }

            fn from_index(i: usize) -> Self {
                Self(u32::try_from(i).expect("identifier space exhausted"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(KindId);
id_type!(
    /// Engine-assigned entity identifier. Entity names are not keys.
    EntityId
);
id_type!(TemplateId);
id_type!(RelationId);
id_type!(ModelId);

/// Attribute every kind carries implicitly.
pub const NAME_ATTRIBUTE: &str = "name";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("kind `{0}` is already defined")]
    DuplicateKind(String),
    #[error("attribute `{attribute}` of kind `{kind}` is both a constant and a placeholder")]
    OverlappingConstantAndAttribute { kind: String, attribute: String },
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("kind `{kind}` has no attribute `{attribute}`")]
    UnknownAttribute { kind: String, attribute: String },
    #[error("entity `{entity}` is missing attribute `{attribute}`")]
    MissingAttribute { entity: String, attribute: String },
    #[error("attribute `{attribute}` expects a {expected} value, got {found}")]
    TypeMismatch {
        attribute: String,
        expected: ValueType,
        found: ValueType,
    },
    #[error("entity name `{name}` disagrees with its `name` attribute")]
    NameConflict { name: String },
    #[error("relation `{template}` expects a `{expected}` {role}, got a `{found}`")]
    KindMismatch {
        template: String,
        role: &'static str,
        expected: String,
        found: String,
    },
    #[error("relation template `{0}` is already defined")]
    DuplicateTemplate(String),
    #[error("unknown relation template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("model `{model}` is a model of ({kind}, {attribute}) but no result pattern modifies it")]
    InconsistentModelOf {
        model: String,
        kind: String,
        attribute: String,
    },
    #[error("model `{model}` changes kind `{kind}` in its result without naming it in its context")]
    ResultKindNotInContext { model: String, kind: String },
}

/// An abstract class of entities: shared constants plus a typed attribute
/// schema. The schema always contains `name: text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kind {
    pub name: String,
    pub constants: BTreeMap<String, Value>,
    pub attribute_schema: BTreeMap<String, ValueType>,
}

impl Kind {
    /// Type of `attribute`, looking at placeholders first and then constants.
    pub fn attribute_type(&self, attribute: &str) -> Option<ValueType> {
        self.attribute_schema
            .get(attribute)
            .copied()
            .or_else(|| self.constants.get(attribute).map(Value::value_type))
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attribute_type(attribute).is_some()
    }
}

/// A runtime instance of a kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub kind: KindId,
    pub name: String,
    /// One value per schema attribute, `name` included.
    pub attributes: BTreeMap<String, Value>,
}

/// Kind plus the attributes that take part in a relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRef {
    pub kind: String,
    pub attributes: Vec<String>,
}

impl TypeRef {
    pub fn new(kind: &str, attributes: &[&str]) -> Self {
        Self {
            kind: kind.to_owned(),
            attributes: attributes.iter().map(|a| (*a).to_owned()).collect(),
        }
    }
}

/// Shared description of one family of entity-entity relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTemplate {
    pub name: String,
    pub explanan_type: TypeRef,
    pub explanandum_type: TypeRef,
    pub reason: String,
    /// Higher is presented first.
    pub priority: i64,
}

/// A causal edge from an explanan entity to an explanandum entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationInstance {
    pub id: RelationId,
    pub template: TemplateId,
    pub explanan: EntityId,
    pub explanandum: EntityId,
}

/// Constraint on one attribute inside a model's context or result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "literal")]
    Literal(Value),
    /// Not yet computed before the modelled phenomenon.
    #[serde(rename = "UNSET")]
    Unset,
    /// Changed by the modelled phenomenon.
    #[serde(rename = "MODIFIED")]
    Modified,
    /// Mentioned but unconstrained.
    #[serde(rename = "FREE")]
    Free,
}

impl Condition {
    /// Whether a final attribute value is compatible with this condition.
    /// Only literals constrain; the markers describe the phenomenon, not the
    /// recorded value.
    pub fn admits(&self, value: &Value) -> bool {
        match self {
            Condition::Literal(expected) => match (expected, value) {
                (Value::Real(_), _) | (_, Value::Real(_)) => expected.as_f64() == value.as_f64(),
                _ => expected == value,
            },
            Condition::Unset | Condition::Modified | Condition::Free => true,
        }
    }
}

/// `(kind, {attribute: condition})` element of a model's context or result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributePattern {
    pub kind: String,
    pub attribute_conditions: BTreeMap<String, Condition>,
}

impl AttributePattern {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_owned(),
            attribute_conditions: BTreeMap::new(),
        }
    }

    pub fn with(mut self, attribute: &str, condition: Condition) -> Self {
        self.attribute_conditions.insert(attribute.to_owned(), condition);
        self
    }

    pub fn literal(self, attribute: &str, value: impl Into<Value>) -> Self {
        self.with(attribute, Condition::Literal(value.into()))
    }

    pub fn mentions(&self, attribute: &str) -> bool {
        self.attribute_conditions.contains_key(attribute)
    }

    /// True when `entity` is of this pattern's kind and every literal
    /// condition holds on its attribute values.
    pub fn matches(&self, mm: &MentalModel, entity: &Entity) -> bool {
        mm.kind(entity.kind).name == self.kind
            && self.attribute_conditions.iter().all(|(attribute, condition)| {
                mm.attribute_value(entity, attribute)
                    .is_some_and(|value| condition.admits(value))
            })
    }
}

/// The `(kind, attribute)` a model changes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelOf {
    pub kind: String,
    pub attribute: String,
}

impl ModelOf {
    pub fn new(kind: &str, attribute: &str) -> Self {
        Self {
            kind: kind.to_owned(),
            attribute: attribute.to_owned(),
        }
    }
}

/// A "story" of how attributes of some kinds change when they interact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub context: Vec<AttributePattern>,
    pub result: Vec<AttributePattern>,
    pub model_of: ModelOf,
    pub story: String,
}

impl Model {
    pub fn context_has_kind(&self, kind: &str) -> bool {
        self.context.iter().any(|p| p.kind == kind)
    }

    pub fn result_has_kind(&self, kind: &str) -> bool {
        self.result.iter().any(|p| p.kind == kind)
    }
}

/// Lookup tables derived from the relation and model collections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Indices {
    /// explanandum entity -> attribute -> relations, in insertion order.
    pub explanandum: HashMap<EntityId, BTreeMap<String, Vec<RelationId>>>,
    /// model-of `(kind, attribute)` -> models, in insertion order.
    pub model_of: HashMap<ModelOf, Vec<ModelId>>,
}

impl Indices {
    fn index_relation(&mut self, relation: &RelationInstance, template: &RelationTemplate) {
        let by_attribute = self.explanandum.entry(relation.explanandum).or_default();
        for attribute in &template.explanandum_type.attributes {
            by_attribute
                .entry(attribute.clone())
                .or_default()
                .push(relation.id);
        }
    }

    fn index_model(&mut self, id: ModelId, model: &Model) {
        self.model_of.entry(model.model_of.clone()).or_default().push(id);
    }
}

/// A finalized, immutable mental model of one AI system prediction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MentalModel {
    kinds: Vec<Kind>,
    entities: Vec<Entity>,
    relation_templates: Vec<RelationTemplate>,
    relations: Vec<RelationInstance>,
    models: Vec<Model>,
    theories: Vec<String>,
    root_output: Option<EntityId>,
    kind_by_name: HashMap<String, KindId>,
    template_by_name: HashMap<String, TemplateId>,
    indices: Indices,
}

impl MentalModel {
    pub fn kinds(&self) -> &[Kind] {
        &self.kinds
    }

    pub fn kind(&self, id: KindId) -> &Kind {
        &self.kinds[id.index()]
    }

    pub fn kind_id(&self, name: &str) -> Option<KindId> {
        self.kind_by_name.get(name).copied()
    }

    pub fn kind_named(&self, name: &str) -> Option<&Kind> {
        self.kind_id(name).map(|id| self.kind(id))
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entity> {
        self.entities.get(id.index())
    }

    /// Entities whose `name` equals `name`, in insertion order.
    pub fn entities_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Entity> + 'a {
        self.entities.iter().filter(move |e| e.name == name)
    }

    pub fn entity_kind(&self, entity: &Entity) -> &Kind {
        self.kind(entity.kind)
    }

    /// Value of an attribute on an entity, falling back to the kind's
    /// constants.
    pub fn attribute_value<'a>(&'a self, entity: &'a Entity, attribute: &str) -> Option<&'a Value> {
        entity
            .attributes
            .get(attribute)
            .or_else(|| self.kind(entity.kind).constants.get(attribute))
    }

    pub fn relation_templates(&self) -> &[RelationTemplate] {
        &self.relation_templates
    }

    pub fn template(&self, id: TemplateId) -> &RelationTemplate {
        &self.relation_templates[id.index()]
    }

    pub fn template_id(&self, name: &str) -> Option<TemplateId> {
        self.template_by_name.get(name).copied()
    }

    pub fn relations(&self) -> &[RelationInstance] {
        &self.relations
    }

    pub fn relation(&self, id: RelationId) -> Option<&RelationInstance> {
        self.relations.get(id.index())
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn model(&self, id: ModelId) -> Option<&Model> {
        self.models.get(id.index())
    }

    pub fn theories(&self) -> &[String] {
        &self.theories
    }

    /// The AI system's output entity, shown first in a dialogue.
    pub fn root_output(&self) -> Option<EntityId> {
        self.root_output
    }

    pub fn indices(&self) -> &Indices {
        &self.indices
    }

    /// Relations whose explanandum is `(entity, attribute)`, in insertion order.
    pub fn relations_explaining(&self, entity: EntityId, attribute: &str) -> &[RelationId] {
        self.indices
            .explanandum
            .get(&entity)
            .and_then(|by_attribute| by_attribute.get(attribute))
            .map_or(&[], Vec::as_slice)
    }

    /// Models registered as changing `(kind, attribute)`, in insertion order.
    pub fn models_of(&self, kind: &str, attribute: &str) -> &[ModelId] {
        self.indices
            .model_of
            .get(&ModelOf::new(kind, attribute))
            .map_or(&[], Vec::as_slice)
    }

    /// Recomputes both indices from the relation and model collections.
    pub fn rebuild_indices(&self) -> Indices {
        let mut indices = Indices::default();
        for relation in &self.relations {
            indices.index_relation(relation, self.template(relation.template));
        }
        for (i, model) in self.models.iter().enumerate() {
            indices.index_model(ModelId::from_index(i), model);
        }
        indices
    }
}

/// Single-writer builder for a [`MentalModel`].
#[derive(Debug, Default)]
pub struct MentalModelBuilder {
    mm: MentalModel,
}

impl MentalModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Read access to what has been built so far.
    pub fn model(&self) -> &MentalModel {
        &self.mm
    }

    pub fn define_kind(
        &mut self,
        name: &str,
        constants: BTreeMap<String, Value>,
        mut attribute_schema: BTreeMap<String, ValueType>,
    ) -> Result<KindId, ModelError> {
        if self.mm.kind_by_name.contains_key(name) {
            return Err(ModelError::DuplicateKind(name.to_owned()));
        }
        attribute_schema
            .entry(NAME_ATTRIBUTE.to_owned())
            .or_insert(ValueType::Text);
        if let Some(attribute) = constants.keys().find(|k| attribute_schema.contains_key(*k)) {
            return Err(ModelError::OverlappingConstantAndAttribute {
                kind: name.to_owned(),
                attribute: attribute.clone(),
            });
        }
        if let Some(&found) = attribute_schema.get(NAME_ATTRIBUTE) {
            if found != ValueType::Text {
                return Err(ModelError::TypeMismatch {
                    attribute: NAME_ATTRIBUTE.to_owned(),
                    expected: ValueType::Text,
                    found,
                });
            }
        }
        let id = KindId::from_index(self.mm.kinds.len());
        self.mm.kinds.push(Kind {
            name: name.to_owned(),
            constants,
            attribute_schema,
        });
        self.mm.kind_by_name.insert(name.to_owned(), id);
        Ok(id)
    }

    /// Creates an entity of `kind`. `values` must cover every schema
    /// attribute except `name`, which is taken from `name`.
    pub fn instantiate_entity(
        &mut self,
        kind: KindId,
        name: &str,
        values: BTreeMap<String, Value>,
    ) -> Result<EntityId, ModelError> {
        let kind_def = self
            .mm
            .kinds
            .get(kind.index())
            .ok_or_else(|| ModelError::UnknownKind(format!("#{kind}")))?;
        let mut attributes = BTreeMap::new();
        for (attribute, value) in values {
            let Some(&expected) = kind_def.attribute_schema.get(&attribute) else {
                return Err(ModelError::UnknownAttribute {
                    kind: kind_def.name.clone(),
                    attribute,
                });
            };
            let value = value.coerce(expected);
            if value.value_type() != expected {
                return Err(ModelError::TypeMismatch {
                    attribute,
                    expected,
                    found: value.value_type(),
                });
            }
            if attribute == NAME_ATTRIBUTE && value.as_str() != Some(name) {
                return Err(ModelError::NameConflict {
                    name: name.to_owned(),
                });
            }
            attributes.insert(attribute, value);
        }
        attributes.insert(NAME_ATTRIBUTE.to_owned(), Value::Text(name.to_owned()));
        if let Some(missing) = kind_def
            .attribute_schema
            .keys()
            .find(|a| !attributes.contains_key(*a))
        {
            return Err(ModelError::MissingAttribute {
                entity: name.to_owned(),
                attribute: missing.clone(),
            });
        }
        let id = EntityId::from_index(self.mm.entities.len());
        self.mm.entities.push(Entity {
            id,
            kind,
            name: name.to_owned(),
            attributes,
        });
        Ok(id)
    }

    fn check_type_ref(&self, type_ref: &TypeRef) -> Result<(), ModelError> {
        let kind = self
            .mm
            .kind_named(&type_ref.kind)
            .ok_or_else(|| ModelError::UnknownKind(type_ref.kind.clone()))?;
        for attribute in &type_ref.attributes {
            if !kind.has_attribute(attribute) {
                return Err(ModelError::UnknownAttribute {
                    kind: kind.name.clone(),
                    attribute: attribute.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn define_relation_template(
        &mut self,
        template: RelationTemplate,
    ) -> Result<TemplateId, ModelError> {
        if self.mm.template_by_name.contains_key(&template.name) {
            return Err(ModelError::DuplicateTemplate(template.name));
        }
        self.check_type_ref(&template.explanan_type)?;
        self.check_type_ref(&template.explanandum_type)?;
        let id = TemplateId::from_index(self.mm.relation_templates.len());
        self.mm.template_by_name.insert(template.name.clone(), id);
        self.mm.relation_templates.push(template);
        Ok(id)
    }

    pub fn add_relation(
        &mut self,
        template: TemplateId,
        explanan: EntityId,
        explanandum: EntityId,
    ) -> Result<RelationId, ModelError> {
        let mm = &self.mm;
        let template_def = mm
            .relation_templates
            .get(template.index())
            .ok_or_else(|| ModelError::UnknownTemplate(format!("#{template}")))?;
        for (role, entity, expected) in [
            ("explanan", explanan, &template_def.explanan_type.kind),
            ("explanandum", explanandum, &template_def.explanandum_type.kind),
        ] {
            let entity = mm.entity(entity).ok_or(ModelError::UnknownEntity(entity))?;
            let found = &mm.kind(entity.kind).name;
            if found != expected {
                return Err(ModelError::KindMismatch {
                    template: template_def.name.clone(),
                    role,
                    expected: expected.clone(),
                    found: found.clone(),
                });
            }
        }
        let relation = RelationInstance {
            id: RelationId::from_index(mm.relations.len()),
            template,
            explanan,
            explanandum,
        };
        self.mm
            .indices
            .index_relation(&relation, &self.mm.relation_templates[template.index()]);
        self.mm.relations.push(relation);
        Ok(relation.id)
    }

    fn check_pattern(&self, pattern: &mut AttributePattern) -> Result<(), ModelError> {
        let kind = self
            .mm
            .kind_named(&pattern.kind)
            .ok_or_else(|| ModelError::UnknownKind(pattern.kind.clone()))?;
        for (attribute, condition) in pattern.attribute_conditions.iter_mut() {
            let Some(expected) = kind.attribute_type(attribute) else {
                return Err(ModelError::UnknownAttribute {
                    kind: kind.name.clone(),
                    attribute: attribute.clone(),
                });
            };
            if let Condition::Literal(value) = condition {
                *value = value.clone().coerce(expected);
                if value.value_type() != expected {
                    return Err(ModelError::TypeMismatch {
                        attribute: attribute.clone(),
                        expected,
                        found: value.value_type(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn add_model(&mut self, mut model: Model) -> Result<ModelId, ModelError> {
        for pattern in model.context.iter_mut().chain(model.result.iter_mut()) {
            self.check_pattern(pattern)?;
        }
        let kind = self
            .mm
            .kind_named(&model.model_of.kind)
            .ok_or_else(|| ModelError::UnknownKind(model.model_of.kind.clone()))?;
        if !kind.has_attribute(&model.model_of.attribute) {
            return Err(ModelError::UnknownAttribute {
                kind: kind.name.clone(),
                attribute: model.model_of.attribute.clone(),
            });
        }
        let modifies_target = model.result.iter().any(|p| {
            p.kind == model.model_of.kind
                && p.attribute_conditions.get(&model.model_of.attribute) == Some(&Condition::Modified)
        });
        if !modifies_target {
            return Err(ModelError::InconsistentModelOf {
                model: model.name.clone(),
                kind: model.model_of.kind.clone(),
                attribute: model.model_of.attribute.clone(),
            });
        }
        if let Some(p) = model.result.iter().find(|p| !model.context_has_kind(&p.kind)) {
            return Err(ModelError::ResultKindNotInContext {
                model: model.name.clone(),
                kind: p.kind.clone(),
            });
        }
        let id = ModelId::from_index(self.mm.models.len());
        self.mm.indices.index_model(id, &model);
        self.mm.models.push(model);
        Ok(id)
    }

    pub fn add_theory_label(&mut self, label: &str) {
        self.mm.theories.push(label.to_owned());
    }

    pub fn set_root_output(&mut self, entity: EntityId) -> Result<(), ModelError> {
        self.mm.entity(entity).ok_or(ModelError::UnknownEntity(entity))?;
        self.mm.root_output = Some(entity);
        Ok(())
    }

    pub fn finish(self) -> MentalModel {
        self.mm
    }
}

/// Builds a string-keyed map from `(&str, T)` pairs.
pub fn attrs<T>(pairs: impl IntoIterator<Item = (&'static str, T)>) -> BTreeMap<String, T> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neuron_kind(b: &mut MentalModelBuilder) -> KindId {
        b.define_kind(
            "Neuron",
            BTreeMap::new(),
            attrs([
                ("activation", ValueType::Real),
                ("layer", ValueType::Integer),
                ("position", ValueType::Integer),
            ]),
        )
        .unwrap()
    }

    fn prolog_kinds(b: &mut MentalModelBuilder) -> (KindId, KindId) {
        let predicate = b
            .define_kind(
                "Predicate",
                BTreeMap::new(),
                attrs([
                    ("fact", ValueType::Boolean),
                    ("truth", ValueType::Boolean),
                    ("text", ValueType::Text),
                ]),
            )
            .unwrap();
        let rule = b
            .define_kind(
                "Rule",
                BTreeMap::new(),
                attrs([
                    ("used", ValueType::Boolean),
                    ("head", ValueType::Text),
                    ("body", ValueType::Text),
                ]),
            )
            .unwrap();
        (predicate, rule)
    }

    #[test]
    fn define_kind_adds_name_placeholder() {
        let mut b = MentalModelBuilder::new();
        let id = neuron_kind(&mut b);
        let kind = b.model().kind(id);
        assert_eq!(kind.name, "Neuron");
        assert_eq!(kind.attribute_schema.get("name"), Some(&ValueType::Text));
        assert_eq!(kind.attribute_schema.len(), 4);
    }

    #[test]
    fn rule_kind_has_boolean_used() {
        let mut b = MentalModelBuilder::new();
        let (_, rule) = prolog_kinds(&mut b);
        let kind = b.model().kind(rule);
        assert_eq!(kind.name, "Rule");
        assert_eq!(kind.attribute_type("used"), Some(ValueType::Boolean));
        assert_eq!(kind.attribute_type("head"), Some(ValueType::Text));
    }

    #[test]
    fn duplicate_kind_is_rejected() {
        let mut b = MentalModelBuilder::new();
        b.define_kind("Neuron", BTreeMap::new(), BTreeMap::new()).unwrap();
        assert_eq!(
            b.define_kind("Neuron", BTreeMap::new(), BTreeMap::new()),
            Err(ModelError::DuplicateKind("Neuron".into()))
        );
    }

    #[test]
    fn constants_and_placeholders_must_be_disjoint() {
        let mut b = MentalModelBuilder::new();
        let err = b
            .define_kind(
                "Neuron",
                attrs([("layer", Value::Integer(0))]),
                attrs([("layer", ValueType::Integer)]),
            )
            .unwrap_err();
        assert!(matches!(err, ModelError::OverlappingConstantAndAttribute { .. }));
    }

    #[test]
    fn instantiate_zero_activation() {
        let mut b = MentalModelBuilder::new();
        let neuron = neuron_kind(&mut b);
        let id = b
            .instantiate_entity(
                neuron,
                "n_1_4",
                attrs([
                    ("activation", Value::Real(0.0)),
                    ("layer", Value::Integer(1)),
                    ("position", Value::Integer(4)),
                ]),
            )
            .unwrap();
        let e = b.model().entity(id).unwrap();
        assert_eq!(e.name, "n_1_4");
        assert_eq!(e.attributes["activation"], Value::Real(0.0));
        assert_eq!(e.attributes["name"], Value::from("n_1_4"));
    }

    #[test]
    fn instantiate_fact_predicate() {
        let mut b = MentalModelBuilder::new();
        let (predicate, _) = prolog_kinds(&mut b);
        let id = b
            .instantiate_entity(
                predicate,
                "b",
                attrs([
                    ("fact", Value::Boolean(true)),
                    ("truth", Value::Boolean(true)),
                    ("text", Value::from("b")),
                ]),
            )
            .unwrap();
        assert_eq!(b.model().entity(id).unwrap().attributes["fact"], Value::Boolean(true));
    }

    #[test]
    fn instantiate_errors() {
        let mut b = MentalModelBuilder::new();
        let neuron = neuron_kind(&mut b);
        let missing = b
            .instantiate_entity(neuron, "bad", attrs([("activation", Value::Real(0.1))]))
            .unwrap_err();
        assert!(matches!(missing, ModelError::MissingAttribute { .. }));

        let mismatch = b
            .instantiate_entity(
                neuron,
                "bad",
                attrs([
                    ("activation", Value::Boolean(true)),
                    ("layer", Value::Integer(1)),
                    ("position", Value::Integer(4)),
                ]),
            )
            .unwrap_err();
        assert!(matches!(mismatch, ModelError::TypeMismatch { .. }));

        let unknown = b
            .instantiate_entity(neuron, "bad", attrs([("colour", Value::from("red"))]))
            .unwrap_err();
        assert!(matches!(unknown, ModelError::UnknownAttribute { .. }));
        assert!(b.model().entities().is_empty());
    }

    #[test]
    fn relation_kinds_are_checked() {
        let mut b = MentalModelBuilder::new();
        let neuron = neuron_kind(&mut b);
        let parameter = b
            .define_kind("Parameter", BTreeMap::new(), attrs([("value", ValueType::Real)]))
            .unwrap();
        let n = |b: &mut MentalModelBuilder, name: &str, layer: i64| {
            b.instantiate_entity(
                neuron,
                name,
                attrs([
                    ("activation", Value::Real(0.0)),
                    ("layer", Value::Integer(layer)),
                    ("position", Value::Integer(0)),
                ]),
            )
            .unwrap()
        };
        let lower = n(&mut b, "n_0_3", 0);
        let upper = n(&mut b, "n_1_4", 1);
        let p = b
            .instantiate_entity(parameter, "w", attrs([("value", Value::Real(0.5))]))
            .unwrap();
        let t = b
            .define_relation_template(RelationTemplate {
                name: "NeuronToNeuronActivation".into(),
                explanan_type: TypeRef::new("Neuron", &["activation"]),
                explanandum_type: TypeRef::new("Neuron", &["activation"]),
                reason: "r".into(),
                priority: 0,
            })
            .unwrap();
        let r = b.add_relation(t, lower, upper).unwrap();
        assert_eq!(b.model().relations_explaining(upper, "activation"), &[r]);
        let err = b.add_relation(t, p, upper).unwrap_err();
        assert!(matches!(err, ModelError::KindMismatch { role: "explanan", .. }));
    }

    #[test]
    fn self_relations_are_allowed() {
        let mut b = MentalModelBuilder::new();
        let (predicate, _) = prolog_kinds(&mut b);
        let fact = b
            .instantiate_entity(
                predicate,
                "b",
                attrs([
                    ("fact", Value::Boolean(true)),
                    ("truth", Value::Boolean(true)),
                    ("text", Value::from("b")),
                ]),
            )
            .unwrap();
        let t = b
            .define_relation_template(RelationTemplate {
                name: "FactToFact".into(),
                explanan_type: TypeRef::new("Predicate", &["fact"]),
                explanandum_type: TypeRef::new("Predicate", &["truth"]),
                reason: "This predicate is True because it is a fact".into(),
                priority: 0,
            })
            .unwrap();
        b.add_relation(t, fact, fact).unwrap();
    }

    #[test]
    fn template_must_reference_known_attributes() {
        let mut b = MentalModelBuilder::new();
        prolog_kinds(&mut b);
        let err = b
            .define_relation_template(RelationTemplate {
                name: "Bad".into(),
                explanan_type: TypeRef::new("Predicate", &["colour"]),
                explanandum_type: TypeRef::new("Predicate", &["truth"]),
                reason: String::new(),
                priority: 0,
            })
            .unwrap_err();
        assert!(matches!(err, ModelError::UnknownAttribute { .. }));
    }

    #[test]
    fn model_of_must_be_modified_in_result() {
        let mut b = MentalModelBuilder::new();
        prolog_kinds(&mut b);
        let used_rule = Model {
            name: "UsedRule".into(),
            context: vec![
                AttributePattern::new("Predicate").with("truth", Condition::Unset),
                AttributePattern::new("Rule")
                    .literal("used", true)
                    .with("head", Condition::Free),
            ],
            result: vec![AttributePattern::new("Predicate").with("truth", Condition::Modified)],
            model_of: ModelOf::new("Predicate", "truth"),
            story: "A used rule makes the predicate in its head True".into(),
        };
        b.add_model(used_rule.clone()).unwrap();
        assert_eq!(b.model().models_of("Predicate", "truth").len(), 1);

        let wrong = Model {
            model_of: ModelOf::new("Rule", "used"),
            ..used_rule.clone()
        };
        assert!(matches!(
            b.add_model(wrong),
            Err(ModelError::InconsistentModelOf { .. })
        ));

        let unknown = Model {
            context: vec![AttributePattern::new("Atom")],
            ..used_rule.clone()
        };
        assert_eq!(b.add_model(unknown), Err(ModelError::UnknownKind("Atom".into())));

        let orphan_result = Model {
            context: vec![AttributePattern::new("Rule").literal("used", true)],
            ..used_rule
        };
        assert!(matches!(
            b.add_model(orphan_result),
            Err(ModelError::ResultKindNotInContext { .. })
        ));
        assert_eq!(b.model().models().len(), 1);
    }

    #[test]
    fn rebuilt_indices_match_incremental_ones() {
        let mut b = MentalModelBuilder::new();
        let (predicate, rule) = prolog_kinds(&mut b);
        let p = b
            .instantiate_entity(
                predicate,
                "a",
                attrs([
                    ("fact", Value::Boolean(false)),
                    ("truth", Value::Boolean(true)),
                    ("text", Value::from("a")),
                ]),
            )
            .unwrap();
        let r = b
            .instantiate_entity(
                rule,
                "R1",
                attrs([
                    ("used", Value::Boolean(true)),
                    ("head", Value::from("a")),
                    ("body", Value::from("b")),
                ]),
            )
            .unwrap();
        let t = b
            .define_relation_template(RelationTemplate {
                name: "HeadToPredicate".into(),
                explanan_type: TypeRef::new("Rule", &["used", "head"]),
                explanandum_type: TypeRef::new("Predicate", &["truth"]),
                reason: String::new(),
                priority: 0,
            })
            .unwrap();
        b.add_relation(t, r, p).unwrap();
        let mm = b.finish();
        assert_eq!(&mm.rebuild_indices(), mm.indices());
    }

    #[test]
    fn literal_conditions_compare_numerically() {
        assert!(Condition::Literal(Value::Real(1.0)).admits(&Value::Integer(1)));
        assert!(!Condition::Literal(Value::Integer(2)).admits(&Value::Integer(1)));
        assert!(Condition::Unset.admits(&Value::Boolean(false)));
    }
}
