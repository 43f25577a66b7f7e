use explainer_core::nn::{
    build_mental_model, forward, ActivationFunction, NetworkSpec, BIAS_SENTINEL, MNIST_LAYERS,
    NEURON_TO_NEURON, OUTPUT_ANSWER, PARAMETER_TO_NEURON,
};
use explainer_core::search::{explain_relation, RelationQuestion};
use explainer_core::{MentalModel, Value};
use explainer_testkit::{arb_network, brute_force_argmax, brute_force_forward};
use proptest::prelude::*;

/// (entities, relations, models) predicted from the layer sizes alone.
fn expected_counts(sizes: &[usize]) -> (usize, usize, usize) {
    let neurons: usize = sizes.iter().sum();
    let gaps = sizes.windows(2);
    let params: usize = gaps.clone().map(|w| w[0] * w[1] + w[1]).sum();
    let relations: usize = gaps.map(|w| w[1] * (2 * w[0] + 1)).sum::<usize>() + sizes[sizes.len() - 1];
    let models = neurons - sizes[0] + 1;
    (neurons + params + 1, relations, models)
}

fn count_kind(mm: &MentalModel, kind: &str) -> usize {
    mm.entities()
        .iter()
        .filter(|e| mm.entity_kind(e).name == kind)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn forward_pass_matches_brute_force((net, input) in arb_network(8)) {
        let record = forward(&net, &input).unwrap();
        let oracle = brute_force_forward(&net, &input);
        for (layer, expected) in record.activations.iter().zip(&oracle) {
            for (x, y) in layer.iter().zip(expected) {
                prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y);
            }
        }
        prop_assert_eq!(record.output_value, brute_force_argmax(oracle.last().unwrap()));

        let mm = build_mental_model(&net, &record).unwrap();
        let root = mm.entity(mm.root_output().unwrap()).unwrap();
        prop_assert_eq!(&mm.entity_kind(root).name, OUTPUT_ANSWER);
        prop_assert_eq!(root.attributes.get("value"), Some(&Value::Integer(record.output_value as i64)));
        for e in mm.entities().iter().filter(|e| mm.entity_kind(e).name == "Neuron") {
            let l = e.attributes["layer"].as_i64().unwrap() as usize;
            let p = e.attributes["position"].as_i64().unwrap() as usize;
            let x = e.attributes["activation"].as_f64().unwrap();
            prop_assert!((x - oracle[l][p]).abs() <= 1e-9);
        }
    }

    #[test]
    fn mental_model_counts_and_fan_in((net, input) in arb_network(8)) {
        let record = forward(&net, &input).unwrap();
        let mm = build_mental_model(&net, &record).unwrap();
        let sizes = &net.layer_sizes;
        let (entities, relations, models) = expected_counts(sizes);
        prop_assert_eq!(mm.entities().len(), entities);
        prop_assert_eq!(mm.relations().len(), relations);
        prop_assert_eq!(mm.models().len(), models);
        prop_assert_eq!(count_kind(&mm, "Parameter"), net.parameter_count());

        for e in mm.entities().iter().filter(|e| mm.entity_kind(e).name == "Neuron") {
            let l = e.attributes["layer"].as_i64().unwrap() as usize;
            let explaining = mm.relations_explaining(e.id, "activation");
            let by = |name: &str| {
                explaining
                    .iter()
                    .filter(|&&r| mm.template(mm.relation(r).unwrap().template).name == name)
                    .count()
            };
            let (neurons, params) = if l == 0 { (0, 0) } else { (sizes[l - 1], sizes[l - 1] + 1) };
            prop_assert_eq!(by(NEURON_TO_NEURON), neurons);
            prop_assert_eq!(by(PARAMETER_TO_NEURON), params);
            let biases = explaining
                .iter()
                .filter(|&&r| {
                    let p = mm.entity(mm.relation(r).unwrap().explanan).unwrap();
                    p.attributes.get("i") == Some(&Value::Integer(BIAS_SENTINEL))
                })
                .count();
            prop_assert_eq!(biases, usize::from(l > 0));
        }

        // every relation is explained by exactly one model
        for relation in mm.relations() {
            let models = explain_relation(&mm, &RelationQuestion { relation: relation.id }).unwrap();
            prop_assert_eq!(models.len(), 1);
            let model = mm.model(models[0]).unwrap();
            if mm.template(relation.template).name == "OutputNeuronToOutputNetwork" {
                prop_assert_eq!(&model.name, "Output generation");
            }
        }
    }
}

#[test]
fn toy_network_counts() {
    let net = NetworkSpec::random(&[2, 2, 1], ActivationFunction::Sigmoid, 7);
    let record = forward(&net, &[0.5, -0.25]).unwrap();
    let mm = build_mental_model(&net, &record).unwrap();
    assert_eq!(count_kind(&mm, "Neuron"), 5);
    assert_eq!(count_kind(&mm, "Parameter"), 9);
    assert_eq!(count_kind(&mm, OUTPUT_ANSWER), 1);
    assert_eq!(mm.relations().len(), 16);
    assert_eq!(mm.models().len(), 4);
    assert_eq!(expected_counts(&[2, 2, 1]), (15, 16, 4));
}

#[test]
fn mnist_sized_network_counts() {
    let net = NetworkSpec::random(&MNIST_LAYERS, ActivationFunction::Sigmoid, 1);
    let input: Vec<f64> = (0..784).map(|i| (i % 17) as f64 / 17.0).collect();
    let record = forward(&net, &input).unwrap();
    let mm = build_mental_model(&net, &record).unwrap();
    assert_eq!(count_kind(&mm, "Neuron"), 824);
    assert_eq!(count_kind(&mm, "Parameter"), 23_860);
    assert_eq!(count_kind(&mm, OUTPUT_ANSWER), 1);
    assert_eq!(mm.relations().len(), 47_690);
    assert_eq!(mm.models().len(), 41);
    assert_eq!(expected_counts(&MNIST_LAYERS), (824 + 23_860 + 1, 47_690, 41));
}

#[test]
fn argmax_ties_take_the_lowest_index() {
    let net = NetworkSpec {
        layer_sizes: vec![1, 3],
        activation_function: ActivationFunction::Relu,
        weights: vec![vec![vec![1.0, 2.0, 2.0]]],
        biases: vec![vec![0.0, 0.0, 0.0]],
    };
    assert_eq!(forward(&net, &[1.0]).unwrap().output_value, 1);
    assert_eq!(brute_force_argmax(&[1.0, 2.0, 2.0]), 1);
}
