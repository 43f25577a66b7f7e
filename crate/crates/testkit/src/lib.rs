//! Generators and independent oracles shared by the test suites.
//!
//! Nothing here calls the code paths it is used to check: the least model is
//! recomputed by a plain fixpoint loop, forward passes by index arithmetic,
//! and the search answers by scanning every relation or model.

use std::collections::{BTreeMap, HashSet};

use explainer_core::nn::NetworkSpec;
use explainer_core::prolog::{Atom, DerivationTree, Program, Resolution};
use explainer_core::{
    AttributePattern, Condition, EntityId, MentalModel, MentalModelBuilder, Model, ModelId,
    ModelOf, RelationId, RelationTemplate, TypeRef, Value, ValueType,
};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Prolog

/// Ground program text over at most `max_atoms` atoms and `max_rules` rules.
pub fn arb_program_text(max_atoms: usize, max_rules: usize) -> impl Strategy<Value = String> {
    (1..=max_atoms).prop_flat_map(move |atoms| {
        let fact = prop::collection::vec(any::<bool>(), atoms);
        let rule = (0..atoms, prop::collection::vec(0..atoms, 1..=3));
        (fact, prop::collection::vec(rule, 0..=max_rules)).prop_map(move |(facts, rules)| {
            let mut text = String::new();
            for (i, is_fact) in facts.iter().enumerate() {
                if *is_fact && i % 2 == 0 {
                    text.push_str(&format!("p{i}.\n"));
                }
            }
            for (head, body) in rules {
                let body: Vec<String> = body.iter().map(|b| format!("p{b}")).collect();
                text.push_str(&format!("p{head} :- {}.\n", body.join(", ")));
            }
            // odd-numbered facts after the rules, to vary source order
            for (i, is_fact) in facts.iter().enumerate() {
                if *is_fact && i % 2 == 1 {
                    text.push_str(&format!("p{i}.\n"));
                }
            }
            text
        })
    })
}

/// Least model by the textbook fixpoint: add heads of satisfied rules until
/// nothing changes.
pub fn naive_least_model(program: &Program) -> HashSet<Atom> {
    let mut model: HashSet<Atom> = program.facts.iter().cloned().collect();
    loop {
        let mut changed = false;
        for rule in &program.rules {
            if rule.body.iter().all(|b| model.contains(b)) && model.insert(rule.head.clone()) {
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

/// Replays a derivation bottom-up under program semantics. Returns true when
/// every node is justified by the program and the root is re-derived
/// without circular support.
pub fn replay_derivation(program: &Program, tree: &DerivationTree) -> bool {
    let structurally_sound = tree.nodes.iter().all(|node| match node.resolution {
        Resolution::Fact => program.facts.contains(&node.atom) && node.children.is_empty(),
        Resolution::Rule(i) => program.rules.get(i).is_some_and(|rule| {
            rule.head == node.atom
                && rule.body.len() == node.children.len()
                && rule
                    .body
                    .iter()
                    .zip(&node.children)
                    .all(|(b, c)| tree.nodes.get(c.0).is_some_and(|n| n.atom == *b))
        }),
    });
    if !structurally_sound || tree.nodes.is_empty() {
        return false;
    }
    let mut derived = vec![false; tree.nodes.len()];
    loop {
        let mut changed = false;
        for (i, node) in tree.nodes.iter().enumerate() {
            if !derived[i] && node.children.iter().all(|c| derived[c.0]) {
                derived[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    derived[0]
}

// ---------------------------------------------------------------------------
// Neural networks

/// Small random architectures: three layers of 1..=max_width neurons.
pub fn arb_network(max_width: usize) -> impl Strategy<Value = (NetworkSpec, Vec<f64>)> {
    use explainer_core::nn::ActivationFunction::*;
    (
        prop::collection::vec(1..=max_width, 3),
        prop_oneof![Just(Sigmoid), Just(Relu), Just(Tanh)],
        any::<u64>(),
    )
        .prop_flat_map(|(sizes, g, seed)| {
            let input = prop::collection::vec(-1.0f64..1.0, sizes[0]);
            (Just(NetworkSpec::random(&sizes, g, seed)), input)
        })
}

/// Forward pass written directly from the neuron formula, one output neuron
/// at a time.
#[allow(clippy::needless_range_loop)] // index form mirrors the formula
pub fn brute_force_forward(net: &NetworkSpec, input: &[f64]) -> Vec<Vec<f64>> {
    let mut layers = vec![input.to_vec()];
    for l in 0..net.layer_sizes.len() - 1 {
        let mut next = Vec::new();
        for j in 0..net.layer_sizes[l + 1] {
            let mut z = net.biases[l][j];
            for i in 0..net.layer_sizes[l] {
                z += net.weights[l][i][j] * layers[l][i];
            }
            next.push(net.activation_function.apply(z));
        }
        layers.push(next);
    }
    layers
}

/// Position of the first maximal value.
pub fn brute_force_argmax(values: &[f64]) -> usize {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v == max).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Search oracles

/// Relations with `entity` as explanandum and `attribute` among the
/// template's explanandum attributes, by full scan in insertion order.
pub fn scan_relations(mm: &MentalModel, entity: EntityId, attribute: &str) -> Vec<RelationId> {
    mm.relations()
        .iter()
        .filter(|r| {
            r.explanandum == entity
                && mm
                    .template(r.template)
                    .explanandum_type
                    .attributes
                    .iter()
                    .any(|a| a == attribute)
        })
        .map(|r| r.id)
        .collect()
}

/// Kind-level model matching by full scan over every model.
pub fn scan_match_models(
    mm: &MentalModel,
    explanan_kind: &str,
    explanandum_kind: &str,
    attribute: &str,
) -> Vec<ModelId> {
    mm.models()
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            m.model_of.kind == explanandum_kind
                && m.model_of.attribute == attribute
                && m.context.iter().any(|p| p.kind == explanandum_kind)
                && m.result.iter().any(|p| p.kind == explanandum_kind)
                && m.context.iter().any(|p| p.kind == explanan_kind)
        })
        .map(|(i, _)| ModelId(i as u32))
        .collect()
}

// ---------------------------------------------------------------------------
// Random mental models

const KIND_NAMES: [&str; 3] = ["Alpha", "Beta", "Gamma"];
const ATTRIBUTES: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone)]
struct Plan {
    kinds: usize,
    entities: Vec<(usize, i64, bool)>,
    templates: Vec<(usize, usize, u8, i64)>,
    relations: Vec<(usize, u16, u16)>,
    models: Vec<(u8, u16, usize, Option<i64>)>,
}

fn attributes_of(mask: u8) -> Vec<&'static str> {
    ATTRIBUTES
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, a)| *a)
        .collect()
}

fn build_plan(plan: Plan) -> MentalModel {
    let mut b = MentalModelBuilder::new();
    let mut kind_ids = Vec::new();
    for (k, name) in KIND_NAMES.iter().enumerate().take(plan.kinds) {
        let constants = if k == 0 {
            BTreeMap::from([("c".to_owned(), Value::Integer(7))])
        } else {
            BTreeMap::new()
        };
        let schema = BTreeMap::from([
            ("x".to_owned(), ValueType::Integer),
            ("y".to_owned(), ValueType::Boolean),
        ]);
        kind_ids.push(b.define_kind(name, constants, schema).unwrap());
    }
    let mut by_kind: Vec<Vec<EntityId>> = vec![Vec::new(); plan.kinds];
    for (i, (k, x, y)) in plan.entities.into_iter().enumerate() {
        let k = k % plan.kinds;
        let values = BTreeMap::from([
            ("x".to_owned(), Value::Integer(x)),
            ("y".to_owned(), Value::Boolean(y)),
        ]);
        by_kind[k].push(b.instantiate_entity(kind_ids[k], &format!("e{i}"), values).unwrap());
    }
    let mut templates = Vec::new();
    for (t, (en, ed, mask, priority)) in plan.templates.into_iter().enumerate() {
        let (en, ed) = (en % plan.kinds, ed % plan.kinds);
        let mask = if mask % 4 == 0 { 1 } else { mask % 4 };
        let id = b
            .define_relation_template(RelationTemplate {
                name: format!("T{t}"),
                explanan_type: TypeRef::new(KIND_NAMES[en], &["x"]),
                explanandum_type: TypeRef::new(KIND_NAMES[ed], &attributes_of(mask)),
                reason: format!("reason {t}"),
                priority,
            })
            .unwrap();
        templates.push((id, en, ed));
    }
    for (t, a, z) in plan.relations {
        let (id, en, ed) = templates[t % templates.len()];
        if by_kind[en].is_empty() || by_kind[ed].is_empty() {
            continue;
        }
        let explanan = by_kind[en][a as usize % by_kind[en].len()];
        let explanandum = by_kind[ed][z as usize % by_kind[ed].len()];
        b.add_relation(id, explanan, explanandum).unwrap();
    }
    for (m, (mask, pick, attribute, literal)) in plan.models.into_iter().enumerate() {
        let mut context_kinds: Vec<usize> = (0..plan.kinds).filter(|k| mask & (1 << k) != 0).collect();
        if context_kinds.is_empty() {
            context_kinds.push(0);
        }
        let result_kind = context_kinds[pick as usize % context_kinds.len()];
        let attribute = ATTRIBUTES[attribute % 2];
        let context = context_kinds
            .iter()
            .map(|&k| {
                let p = AttributePattern::new(KIND_NAMES[k]).with("x", Condition::Free);
                match literal {
                    Some(v) if k == result_kind => p.literal("x", v),
                    _ => p,
                }
            })
            .collect();
        b.add_model(Model {
            name: format!("M{m}"),
            context,
            result: vec![AttributePattern::new(KIND_NAMES[result_kind]).with(attribute, Condition::Modified)],
            model_of: ModelOf::new(KIND_NAMES[result_kind], attribute),
            story: format!("story {m}"),
        })
        .unwrap();
    }
    if let Some(&first) = by_kind.iter().flatten().next() {
        b.set_root_output(first).unwrap();
    }
    b.finish()
}

/// Random mental models: up to 3 kinds, 12 entities, 5 templates with mixed
/// priorities, 30 relations and 6 models.
pub fn arb_mental_model() -> impl Strategy<Value = MentalModel> {
    (1usize..=3)
        .prop_flat_map(|kinds| {
            (
                Just(kinds),
                prop::collection::vec((0..kinds, 0i64..3, any::<bool>()), 1..=12),
                prop::collection::vec((0..kinds, 0..kinds, 1u8..4, -2i64..=2), 1..=5),
                prop::collection::vec((0usize..5, any::<u16>(), any::<u16>()), 0..=30),
                prop::collection::vec((1u8..8, any::<u16>(), 0usize..2, prop::option::of(0i64..3)), 0..=6),
            )
        })
        .prop_map(|(kinds, entities, templates, relations, models)| {
            build_plan(Plan {
                kinds,
                entities,
                templates,
                relations,
                models,
            })
        })
}

/// Every `(entity, attribute)` question a mental model admits, constants
/// included.
pub fn all_entity_questions(mm: &MentalModel) -> Vec<(EntityId, String)> {
    mm.entities()
        .iter()
        .flat_map(|e| {
            let kind = mm.kind(e.kind);
            kind.attribute_schema
                .keys()
                .chain(kind.constants.keys())
                .map(move |a| (e.id, a.clone()))
        })
        .collect()
}
