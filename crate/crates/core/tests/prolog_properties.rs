use std::collections::HashSet;

use explainer_core::prolog::{
    build_mental_model, least_model, parse_program, solve, Atom, PrologError, Resolution,
};
use explainer_core::search::{explain_relation, RelationQuestion};
use explainer_core::{MentalModel, Value};
use explainer_testkit::{arb_program_text, naive_least_model, replay_derivation};
use proptest::prelude::*;

fn template_name(mm: &MentalModel, relation: &explainer_core::RelationInstance) -> String {
    mm.template(relation.template).name.clone()
}

fn entity_named<'a>(mm: &'a MentalModel, name: &str) -> &'a explainer_core::Entity {
    mm.entities().iter().find(|e| e.name == name).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn least_model_matches_naive_fixpoint(text in arb_program_text(12, 10)) {
        let program = parse_program(&text).unwrap();
        let expected = naive_least_model(&program);
        let model = least_model(&program);
        prop_assert_eq!(model.len(), expected.len());
        for atom in &program.atoms {
            prop_assert_eq!(model.contains(atom), expected.contains(atom), "atom {}", atom);
        }
    }

    #[test]
    fn derivations_exist_exactly_for_true_atoms(text in arb_program_text(12, 10)) {
        let program = parse_program(&text).unwrap();
        let truths = naive_least_model(&program);
        for atom in &program.atoms {
            match solve(&program, atom) {
                Some(tree) => {
                    prop_assert!(truths.contains(atom));
                    prop_assert_eq!(&tree.root().atom, atom);
                    prop_assert!(replay_derivation(&program, &tree), "unsound derivation of {}", atom);
                }
                None => prop_assert!(!truths.contains(atom)),
            }
        }
    }

    #[test]
    fn mental_model_reflects_the_derivation(text in arb_program_text(12, 10)) {
        let program = parse_program(&text).unwrap();
        let truths = naive_least_model(&program);
        for query in program.atoms.iter().filter(|a| truths.contains(*a)) {
            let tree = solve(&program, query).unwrap();
            let mm = build_mental_model(&program, &tree).unwrap();
            prop_assert_eq!(mm.entities().len(), program.atoms.len() + program.rules.len());
            prop_assert_eq!(mm.models().len(), 3);
            prop_assert_eq!(mm.root_output(), Some(entity_named(&mm, query.as_str()).id));

            for (i, rule) in program.rules.iter().enumerate() {
                let used = tree.nodes.iter().any(|n| n.resolution == Resolution::Rule(i));
                let entity = entity_named(&mm, &rule.label);
                prop_assert_eq!(entity.attributes.get("used"), Some(&Value::Boolean(used)));
                let body_links = mm
                    .relations()
                    .iter()
                    .filter(|r| r.explanandum == entity.id && template_name(&mm, r) == "PredicateToBody")
                    .count();
                prop_assert_eq!(body_links, if used { rule.body.len() } else { 0 });
            }
            for relation in mm.relations() {
                let explanandum = mm.entity(relation.explanandum).unwrap();
                match template_name(&mm, relation).as_str() {
                    "HeadToPredicate" | "FactToFact" => {
                        prop_assert_eq!(explanandum.attributes.get("truth"), Some(&Value::Boolean(true)));
                    }
                    _ => {}
                }
                if template_name(&mm, relation) == "FactToFact" {
                    prop_assert!(program.is_fact(&Atom::from(explanandum.name.as_str())));
                }
                let models = explain_relation(&mm, &RelationQuestion { relation: relation.id }).unwrap();
                prop_assert_eq!(models.len(), 1);
            }
        }
    }
}

#[test]
fn p1_least_model_and_derivation() {
    let program = parse_program("b. c. a :- b, c.").unwrap();
    let model = least_model(&program);
    let expected: HashSet<Atom> = ["a", "b", "c"].map(Atom::from).into();
    assert_eq!(naive_least_model(&program), expected);
    assert_eq!(model.len(), 3);
    let tree = solve(&program, &Atom::from("a")).unwrap();
    assert_eq!(tree.root().resolution, Resolution::Rule(0));
    assert!(replay_derivation(&program, &tree));
    assert!(solve(&program, &Atom::from("d")).is_none());
}

#[test]
fn cyclic_programs_terminate() {
    let program = parse_program("b. a :- a. a :- b. c :- d. d :- c.").unwrap();
    let tree = solve(&program, &Atom::from("a")).unwrap();
    assert!(replay_derivation(&program, &tree));
    assert_eq!(tree.root().resolution, Resolution::Rule(1));
    assert!(solve(&program, &Atom::from("c")).is_none());
}

#[test]
fn rejected_inputs() {
    assert!(matches!(parse_program("a :- \\+ b."), Err(PrologError::NegationNotAllowed { .. })));
    assert!(matches!(parse_program("p(X) :- q."), Err(PrologError::VariableNotAllowed { .. })));
    assert!(matches!(parse_program("a :- b"), Err(PrologError::Syntax { .. })));
}
