//! JSON document format for mental models.
//!
//! ```json
//! { "version": 1, "kinds": [...], "entities": [...], "relation_templates": [...],
//!   "relations": [...], "models": [...], "theories": [...], "root_output": 3 }
//! ```
//!
//! Entities name their kind, relations name their template and point at
//! entities by id. Reading a document replays it through the
//! [`MentalModelBuilder`], so every instantiation check runs again and the
//! indices are rebuilt.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    EntityId, Kind, MentalModel, MentalModelBuilder, Model, ModelError, RelationId,
    RelationTemplate,
};
use crate::value::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("unsupported document version {found} (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u32 },
    #[error("invalid mental model: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u32,
    kinds: Vec<Kind>,
    entities: Vec<EntityRecord>,
    relation_templates: Vec<RelationTemplate>,
    relations: Vec<RelationRecord>,
    models: Vec<Model>,
    theories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root_output: Option<EntityId>,
}

#[derive(Serialize, Deserialize)]
struct EntityRecord {
    id: EntityId,
    kind: String,
    name: String,
    attributes: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct RelationRecord {
    id: RelationId,
    template: String,
    explanan: EntityId,
    explanandum: EntityId,
}

fn to_document(mm: &MentalModel) -> Document {
    Document {
        version: SCHEMA_VERSION,
        kinds: mm.kinds().to_vec(),
        entities: mm
            .entities()
            .iter()
            .map(|e| EntityRecord {
                id: e.id,
                kind: mm.kind(e.kind).name.clone(),
                name: e.name.clone(),
                attributes: e
                    .attributes
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("literal encodes")))
                    .collect(),
            })
            .collect(),
        relation_templates: mm.relation_templates().to_vec(),
        relations: mm
            .relations()
            .iter()
            .map(|r| RelationRecord {
                id: r.id,
                template: mm.template(r.template).name.clone(),
                explanan: r.explanan,
                explanandum: r.explanandum,
            })
            .collect(),
        models: mm.models().to_vec(),
        theories: mm.theories().to_vec(),
        root_output: mm.root_output(),
    }
}

/// Serializes a mental model as pretty-printed JSON.
pub fn serialize(mm: &MentalModel) -> String {
    serde_json::to_string_pretty(&to_document(mm)).expect("document encodes")
}

/// Parses and validates a mental-model document.
pub fn deserialize(text: &str) -> Result<MentalModel, DocumentError> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| DocumentError::MalformedDocument(e.to_string()))?;
    let version = raw
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| DocumentError::MalformedDocument("missing integer `version`".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(DocumentError::SchemaVersionMismatch {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let doc: Document =
        serde_json::from_value(raw).map_err(|e| DocumentError::MalformedDocument(e.to_string()))?;
    from_document(doc)
}

fn from_document(doc: Document) -> Result<MentalModel, DocumentError> {
    let mut b = MentalModelBuilder::new();
    for kind in doc.kinds {
        b.define_kind(&kind.name, kind.constants, kind.attribute_schema)?;
    }
    for record in doc.entities {
        let kind_id = b
            .model()
            .kind_id(&record.kind)
            .ok_or_else(|| ModelError::UnknownKind(record.kind.clone()))?;
        let kind = b.model().kind(kind_id);
        let mut values = BTreeMap::new();
        for (attribute, json) in record.attributes {
            let expected = kind.attribute_schema.get(&attribute).copied().ok_or_else(|| {
                ModelError::UnknownAttribute {
                    kind: kind.name.clone(),
                    attribute: attribute.clone(),
                }
            })?;
            let value = Value::from_json(&json, expected).ok_or_else(|| {
                DocumentError::MalformedDocument(format!(
                    "entity {}: attribute `{attribute}` is not a {expected}",
                    record.id
                ))
            })?;
            values.insert(attribute, value);
        }
        let id = b.instantiate_entity(kind_id, &record.name, values)?;
        if id != record.id {
            return Err(DocumentError::MalformedDocument(format!(
                "entity ids must be sequential: expected {id}, found {}",
                record.id
            )));
        }
    }
    for template in doc.relation_templates {
        b.define_relation_template(template)?;
    }
    for record in doc.relations {
        let template = b
            .model()
            .template_id(&record.template)
            .ok_or_else(|| ModelError::UnknownTemplate(record.template.clone()))?;
        let id = b.add_relation(template, record.explanan, record.explanandum)?;
        if id != record.id {
            return Err(DocumentError::MalformedDocument(format!(
                "relation ids must be sequential: expected {id}, found {}",
                record.id
            )));
        }
    }
    for model in doc.models {
        b.add_model(model)?;
    }
    for label in &doc.theories {
        b.add_theory_label(label);
    }
    if let Some(root) = doc.root_output {
        b.set_root_output(root)?;
    }
    Ok(b.finish())
}
