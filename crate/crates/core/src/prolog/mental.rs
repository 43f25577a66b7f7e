//! Mental model of one Prolog derivation.
//!
//! Kinds `Predicate` and `Rule` are instantiated for every atom and rule of
//! the program. Relations depend on the derivation only: a rule node yields
//! `HeadToPredicate` and one `PredicateToBody` per body atom, a fact node
//! yields `FactToFact`. The three models are the abstract versions of these
//! relations.

use std::collections::BTreeMap;

use super::solver::{least_model, DerivationTree, Resolution};
use super::{Atom, Program, PrologError};
use crate::model::{
    attrs, AttributePattern, Condition, EntityId, MentalModel, MentalModelBuilder, Model, ModelOf,
    RelationTemplate, TypeRef,
};
use crate::value::{Value, ValueType};

pub const PREDICATE: &str = "Predicate";
pub const RULE: &str = "Rule";

pub const HEAD_TO_PREDICATE: &str = "HeadToPredicate";
pub const PREDICATE_TO_BODY: &str = "PredicateToBody";
pub const FACT_TO_FACT: &str = "FactToFact";

fn templates() -> [RelationTemplate; 3] {
    [
        RelationTemplate {
            name: HEAD_TO_PREDICATE.into(),
            explanan_type: TypeRef::new(RULE, &["used", "head"]),
            explanandum_type: TypeRef::new(PREDICATE, &["truth"]),
            reason: "This predicate is true because it is the head of this used rule".into(),
            priority: 0,
        },
        RelationTemplate {
            name: PREDICATE_TO_BODY.into(),
            explanan_type: TypeRef::new(PREDICATE, &["truth"]),
            explanandum_type: TypeRef::new(RULE, &["used"]),
            reason: "This rule was used because this predicate in the body was true".into(),
            priority: 0,
        },
        RelationTemplate {
            name: FACT_TO_FACT.into(),
            explanan_type: TypeRef::new(PREDICATE, &["fact"]),
            explanandum_type: TypeRef::new(PREDICATE, &["truth"]),
            reason: "This predicate is True because it is a fact".into(),
            priority: 0,
        },
    ]
}

fn models() -> [Model; 3] {
    [
        Model {
            name: "UsedRule".into(),
            context: vec![
                AttributePattern::new(PREDICATE).with("truth", Condition::Unset),
                AttributePattern::new(RULE)
                    .literal("used", true)
                    .with("head", Condition::Free),
            ],
            result: vec![AttributePattern::new(PREDICATE).with("truth", Condition::Modified)],
            model_of: ModelOf::new(PREDICATE, "truth"),
            story: "A used rule makes the predicate in its head True".into(),
        },
        Model {
            name: "TrueBody".into(),
            context: vec![
                AttributePattern::new(PREDICATE).literal("truth", true),
                AttributePattern::new(RULE).with("used", Condition::Unset),
            ],
            result: vec![AttributePattern::new(RULE).with("used", Condition::Modified)],
            model_of: ModelOf::new(RULE, "used"),
            story: "A rule is considered used when each element in body evaluated to True".into(),
        },
        Model {
            name: "Fact".into(),
            context: vec![AttributePattern::new(PREDICATE)
                .with("truth", Condition::Unset)
                .literal("fact", true)],
            result: vec![AttributePattern::new(PREDICATE)
                .with("truth", Condition::Modified)
                .literal("fact", true)],
            model_of: ModelOf::new(PREDICATE, "truth"),
            story: "A predicate which is a fact in the program will always evaluate to True".into(),
        },
    ]
}

fn check_tree(program: &Program, tree: &DerivationTree) -> Result<(), PrologError> {
    let mismatch = |m: String| Err(PrologError::TreeProgramMismatch(m));
    if tree.nodes.is_empty() {
        return mismatch("empty derivation".into());
    }
    for node in &tree.nodes {
        if !program.atoms.contains(&node.atom) {
            return mismatch(format!("atom `{}` does not occur in the program", node.atom));
        }
        if node.children.iter().any(|c| c.0 >= tree.nodes.len()) {
            return mismatch(format!("node `{}` has a dangling child", node.atom));
        }
        match node.resolution {
            Resolution::Fact => {
                if !program.is_fact(&node.atom) || !node.children.is_empty() {
                    return mismatch(format!("`{}` is resolved as a fact but is not one", node.atom));
                }
            }
            Resolution::Rule(i) => {
                let Some(rule) = program.rules.get(i) else {
                    return mismatch(format!("rule #{i} does not exist"));
                };
                let children: Vec<&Atom> = node.children.iter().map(|&c| &tree.node(c).atom).collect();
                if rule.head != node.atom || children != rule.body.iter().collect::<Vec<_>>() {
                    return mismatch(format!("`{}` does not match rule {}", node.atom, rule.label));
                }
            }
        }
    }
    Ok(())
}

/// Builds the mental model for `program` and one derivation `tree` of it.
/// The query predicate becomes the root output.
pub fn build_mental_model(
    program: &Program,
    tree: &DerivationTree,
) -> Result<MentalModel, PrologError> {
    check_tree(program, tree)?;
    let model = least_model(program);
    let used = tree.used_rules();

    // Kinds, templates and models are fixed; failures here are programming errors.
    let mut b = MentalModelBuilder::new();
    let predicate = b
        .define_kind(
            PREDICATE,
            BTreeMap::new(),
            attrs([
                ("fact", ValueType::Boolean),
                ("truth", ValueType::Boolean),
                ("text", ValueType::Text),
            ]),
        )
        .expect("fresh kind");
    let rule_kind = b
        .define_kind(
            RULE,
            BTreeMap::new(),
            attrs([
                ("used", ValueType::Boolean),
                ("head", ValueType::Text),
                ("body", ValueType::Text),
            ]),
        )
        .expect("fresh kind");

    let mut atom_entity: BTreeMap<&Atom, EntityId> = BTreeMap::new();
    for atom in &program.atoms {
        let id = b
            .instantiate_entity(
                predicate,
                atom.as_str(),
                attrs([
                    ("fact", Value::Boolean(program.is_fact(atom))),
                    ("truth", Value::Boolean(model.contains(atom))),
                    ("text", Value::from(atom.as_str())),
                ]),
            )
            .expect("predicate attributes match the kind");
        atom_entity.insert(atom, id);
    }
    let rule_entities: Vec<EntityId> = program
        .rules
        .iter()
        .enumerate()
        .map(|(i, rule)| {
            b.instantiate_entity(
                rule_kind,
                &rule.label,
                attrs([
                    ("used", Value::Boolean(used.binary_search(&i).is_ok())),
                    ("head", Value::from(rule.head.as_str())),
                    ("body", Value::from(rule.body_text())),
                ]),
            )
            .expect("rule attributes match the kind")
        })
        .collect();

    let [head_to_predicate, predicate_to_body, fact_to_fact] = templates().map(|t| {
        b.define_relation_template(t).expect("fixed templates are valid")
    });
    for id in tree.preorder() {
        let node = tree.node(id);
        let target = atom_entity[&node.atom];
        let added = match node.resolution {
            Resolution::Fact => b.add_relation(fact_to_fact, target, target).map(|_| ()),
            Resolution::Rule(i) => {
                let rule = rule_entities[i];
                b.add_relation(head_to_predicate, rule, target).and_then(|_| {
                    node.children.iter().try_for_each(|&child| {
                        b.add_relation(predicate_to_body, atom_entity[&tree.node(child).atom], rule)
                            .map(|_| ())
                    })
                })
            }
        };
        added.expect("relation kinds match the templates");
    }
    for m in models() {
        b.add_model(m).expect("fixed models are valid");
    }
    b.set_root_output(atom_entity[&tree.root().atom])
        .expect("root atom has an entity");
    Ok(b.finish())
}
