//! Search for explanations over a finalized [`MentalModel`].
//!
//! Two questions are supported. An [`EntityQuestion`] asks why an entity's
//! attribute has its value and is answered with entity-entity relations,
//! highest priority first, one priority tier per ask. A [`RelationQuestion`]
//! asks how a relation comes about and is answered with the models that
//! describe it.
//!
//! Model matching for a relation `explanan -> explanandum` keeps a model when:
//!
//! 1. its model-of pair is `(explanandum kind, a)` for an attribute `a` of the
//!    relation's explanandum type (looked up through the model-of index),
//! 2. the explanandum kind appears in both context and result,
//! 3. the explanan kind appears in the context,
//!
//! and, at the entity level, when the explanandum satisfies one of the
//! model's result patterns and one of its context patterns, and the explanan
//! satisfies a context pattern that mentions every attribute of the
//! relation's explanan type. Conditions 1-3 alone are [`match_models`].

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{Entity, EntityId, MentalModel, Model, ModelId, RelationId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("entity `{entity}` has no attribute `{attribute}`")]
    UnknownAttribute { entity: String, attribute: String },
    #[error("unknown relation {0}")]
    UnknownRelation(RelationId),
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("no model explains relation {0}; the mental model is incomplete")]
    NoMatchingModel(RelationId),
}

/// "Why does this entity's attribute have its value?"
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityQuestion {
    pub entity: EntityId,
    pub attribute: String,
}

impl EntityQuestion {
    pub fn new(entity: EntityId, attribute: &str) -> Self {
        Self {
            entity,
            attribute: attribute.to_owned(),
        }
    }
}

/// "How does this relation come about?"
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelationQuestion {
    pub relation: RelationId,
}

/// Relations already shown, per entity question.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresentedSet {
    shown: HashMap<EntityQuestion, BTreeSet<RelationId>>,
}

impl PresentedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_presented(&self, question: &EntityQuestion, relation: RelationId) -> bool {
        self.shown
            .get(question)
            .is_some_and(|set| set.contains(&relation))
    }

    pub fn presented_for(&self, question: &EntityQuestion) -> Option<&BTreeSet<RelationId>> {
        self.shown.get(question)
    }

    pub fn record(&mut self, question: &EntityQuestion, relations: &[RelationId]) {
        self.shown
            .entry(question.clone())
            .or_default()
            .extend(relations.iter().copied());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityQuestion, &BTreeSet<RelationId>)> {
        self.shown.iter()
    }

    pub fn clear(&mut self) {
        self.shown.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.shown.values().all(BTreeSet::is_empty)
    }
}

/// Answer to an [`EntityQuestion`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntityAnswer {
    /// Unpresented relations sharing the highest remaining priority, in
    /// insertion order.
    Tier(Vec<RelationId>),
    /// Every matching relation has been presented for this question.
    Exhausted,
}

fn check_question<'a>(
    mm: &'a MentalModel,
    question: &EntityQuestion,
) -> Result<&'a Entity, SearchError> {
    let entity = mm
        .entity(question.entity)
        .ok_or(SearchError::UnknownEntity(question.entity))?;
    if !mm.entity_kind(entity).has_attribute(&question.attribute) {
        return Err(SearchError::UnknownAttribute {
            entity: entity.name.clone(),
            attribute: question.attribute.clone(),
        });
    }
    Ok(entity)
}

/// Returns the next priority tier of unpresented relations explaining
/// `question` and marks them presented.
pub fn explain_entity(
    mm: &MentalModel,
    presented: &mut PresentedSet,
    question: &EntityQuestion,
) -> Result<EntityAnswer, SearchError> {
    check_question(mm, question)?;
    let pending: Vec<(RelationId, i64)> = mm
        .relations_explaining(question.entity, &question.attribute)
        .iter()
        .filter(|&&id| !presented.is_presented(question, id))
        .map(|&id| {
            let relation = mm.relation(id).expect("indexed relation exists");
            (id, mm.template(relation.template).priority)
        })
        .collect();
    let Some(top) = pending.iter().map(|&(_, p)| p).max() else {
        return Ok(EntityAnswer::Exhausted);
    };
    let tier: Vec<RelationId> = pending
        .into_iter()
        .filter(|&(_, p)| p == top)
        .map(|(id, _)| id)
        .collect();
    presented.record(question, &tier);
    Ok(EntityAnswer::Tier(tier))
}

/// Kind-level matching predicate, without the model-of condition.
pub fn kinds_fit(model: &Model, explanan_kind: &str, explanandum_kind: &str) -> bool {
    model.context_has_kind(explanandum_kind)
        && model.result_has_kind(explanandum_kind)
        && model.context_has_kind(explanan_kind)
}

/// Models whose model-of is `(explanandum_kind, attribute)` and whose
/// context/result name the two kinds appropriately. Insertion order.
pub fn match_models(
    mm: &MentalModel,
    explanan_kind: &str,
    explanandum_kind: &str,
    attribute: &str,
) -> Result<Vec<ModelId>, SearchError> {
    for kind in [explanan_kind, explanandum_kind] {
        if mm.kind_id(kind).is_none() {
            return Err(SearchError::UnknownKind(kind.to_owned()));
        }
    }
    Ok(mm
        .models_of(explanandum_kind, attribute)
        .iter()
        .copied()
        .filter(|&id| {
            let model = mm.model(id).expect("indexed model exists");
            kinds_fit(model, explanan_kind, explanandum_kind)
        })
        .collect())
}

/// Models explaining one relation instance, in insertion order. Does not
/// touch any presented state.
pub fn explain_relation(
    mm: &MentalModel,
    question: &RelationQuestion,
) -> Result<Vec<ModelId>, SearchError> {
    let relation = mm
        .relation(question.relation)
        .ok_or(SearchError::UnknownRelation(question.relation))?;
    let template = mm.template(relation.template);
    let explanan = mm
        .entity(relation.explanan)
        .ok_or(SearchError::UnknownEntity(relation.explanan))?;
    let explanandum = mm
        .entity(relation.explanandum)
        .ok_or(SearchError::UnknownEntity(relation.explanandum))?;
    let explanan_kind = &mm.entity_kind(explanan).name;
    let explanandum_kind = &mm.entity_kind(explanandum).name;

    let mut candidates = BTreeSet::new();
    for attribute in &template.explanandum_type.attributes {
        candidates.extend(match_models(mm, explanan_kind, explanandum_kind, attribute)?);
    }
    let matched: Vec<ModelId> = candidates
        .into_iter()
        .filter(|&id| {
            let model = mm.model(id).expect("indexed model exists");
            let explanan_fits = model.context.iter().any(|p| {
                template.explanan_type.attributes.iter().all(|a| p.mentions(a))
                    && p.matches(mm, explanan)
            });
            explanan_fits
                && model.context.iter().any(|p| p.matches(mm, explanandum))
                && model.result.iter().any(|p| p.matches(mm, explanandum))
        })
        .collect();
    if matched.is_empty() {
        return Err(SearchError::NoMatchingModel(question.relation));
    }
    Ok(matched)
}
