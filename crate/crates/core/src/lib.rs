//! Explanation engine over "mental models" of AI systems.
//!
//! A mental model is built from five categories of knowledge: data (stored as
//! entity attribute values), entities, kinds, models and theories. Adapters
//! turn one prediction of an AI system into a [`MentalModel`]; a
//! [`dialogue::Session`] then answers two kinds of question over it:
//!
//! - `why <entity>.<attribute>`: which entity-entity relations explain a value,
//! - `how rel:<n>`: which model explains a presented relation.
//!
//! Two adapters are provided: [`nn`] for feed-forward networks and [`prolog`]
//! for grounded, negation-free Prolog programs.

pub mod dialogue;
pub mod document;
pub mod model;
pub mod nn;
pub mod prolog;
pub mod search;
pub mod value;

pub use model::{
    AttributePattern, Condition, Entity, EntityId, Kind, KindId, MentalModel, MentalModelBuilder,
    Model, ModelError, ModelId, ModelOf, RelationId, RelationInstance, RelationTemplate,
    TemplateId, TypeRef,
};
pub use value::{Value, ValueType};
