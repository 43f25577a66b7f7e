//! Feed-forward network inference and its mental model.
//!
//! A [`NetworkSpec`] holds one weight matrix and one bias vector per pair of
//! adjacent layers. `weights[l][i][j]` connects neuron `i` of layer `l` to
//! neuron `j` of layer `l + 1`, so activations are computed as
//!
//! ```text
//! x[l+1][j] = g(sum_i weights[l][i][j] * x[l][i] + biases[l][j])
//! ```
//!
//! The network's answer is the position of the largest output activation
//! (lowest index on ties).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    attrs, AttributePattern, Condition, EntityId, MentalModel, MentalModelBuilder, Model, ModelOf,
    RelationTemplate, TypeRef,
};
use crate::value::{Value, ValueType};

pub const NEURON: &str = "Neuron";
pub const PARAMETER: &str = "Parameter";
pub const OUTPUT_ANSWER: &str = "OutputAnswer";

pub const NEURON_TO_NEURON: &str = "NeuronToNeuronActivation";
pub const PARAMETER_TO_NEURON: &str = "ParameterToNeuronActivation";
pub const OUTPUT_NEURON_TO_OUTPUT: &str = "OutputNeuronToOutputNetwork";

/// `i` coordinate given to bias parameters.
pub const BIAS_SENTINEL: i64 = -1;

/// Layer sizes of the MNIST classifier used as the reference example.
pub const MNIST_LAYERS: [usize; 3] = [784, 30, 10];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("malformed network document: {0}")]
    MalformedDocument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input has {found} values, the network expects {expected}")]
    InputLengthMismatch { expected: usize, found: usize },
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("activation record does not belong to this network: {0}")]
    RecordMismatch(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationFunction {
    #[default]
    Sigmoid,
    Relu,
    Tanh,
}

impl ActivationFunction {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationFunction::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationFunction::Relu => x.max(0.0),
            ActivationFunction::Tanh => x.tanh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationFunction::Sigmoid => "sigmoid",
            ActivationFunction::Relu => "relu",
            ActivationFunction::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    #[serde(rename = "activation", default)]
    pub activation_function: ActivationFunction,
    /// One matrix per layer gap, row-indexed by the lower-layer neuron.
    pub weights: Vec<Vec<Vec<f64>>>,
    /// One vector per layer gap, indexed by the upper-layer neuron.
    pub biases: Vec<Vec<f64>>,
}

impl NetworkSpec {
    /// Network with weights and biases drawn uniformly from (-1, 1).
    pub fn random(layer_sizes: &[usize], activation_function: ActivationFunction, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (lower, upper) = (pair[0], pair[1]);
            weights.push(
                (0..lower)
                    .map(|_| (0..upper).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect(),
            );
            biases.push((0..upper).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        Self {
            layer_sizes: layer_sizes.to_vec(),
            activation_function,
            weights,
            biases,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let sizes = &self.layer_sizes;
        if sizes.len() < 2 {
            return Err(NnError::ShapeMismatch("at least two layers are required".into()));
        }
        if let Some(l) = sizes.iter().position(|&n| n == 0) {
            return Err(NnError::ShapeMismatch(format!("layer {l} is empty")));
        }
        let gaps = sizes.len() - 1;
        if self.weights.len() != gaps || self.biases.len() != gaps {
            return Err(NnError::ShapeMismatch(format!(
                "{} layers need {gaps} weight matrices and bias vectors, found {} and {}",
                sizes.len(),
                self.weights.len(),
                self.biases.len()
            )));
        }
        for l in 0..gaps {
            let (lower, upper) = (sizes[l], sizes[l + 1]);
            if self.weights[l].len() != lower {
                return Err(NnError::ShapeMismatch(format!(
                    "weights[{l}] has {} rows, expected {lower}",
                    self.weights[l].len()
                )));
            }
            if let Some(i) = self.weights[l].iter().position(|row| row.len() != upper) {
                return Err(NnError::ShapeMismatch(format!(
                    "weights[{l}][{i}] has {} entries, expected {upper}",
                    self.weights[l][i].len()
                )));
            }
            if self.biases[l].len() != upper {
                return Err(NnError::ShapeMismatch(format!(
                    "biases[{l}] has {} entries, expected {upper}",
                    self.biases[l].len()
                )));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|p| p[0] * p[1] + p[1])
            .sum()
    }
}

/// Parses and validates a network document.
pub fn load_network(text: &str) -> Result<NetworkSpec, NnError> {
    let net: NetworkSpec =
        serde_json::from_str(text).map_err(|e| NnError::MalformedDocument(e.to_string()))?;
    net.validate()?;
    Ok(net)
}

/// Parses an input vector given as a JSON array or a single CSV row.
pub fn load_input(text: &str) -> Result<Vec<f64>, NnError> {
    let text = text.trim();
    if text.starts_with('[') {
        return serde_json::from_str(text).map_err(|e| NnError::MalformedInput(e.to_string()));
    }
    let mut rows = text.lines().filter(|l| !l.trim().is_empty());
    let row = rows.next().unwrap_or("");
    if rows.next().is_some() {
        return Err(NnError::MalformedInput("expected a single CSV row".into()));
    }
    row.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .map_err(|e| NnError::MalformedInput(format!("`{}`: {e}", cell.trim())))
        })
        .collect()
}

/// Every neuron's activation for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationRecord {
    /// `activations[l][p]`; layer 0 is the input.
    pub activations: Vec<Vec<f64>>,
    /// Argmax position over the last layer.
    pub output_value: usize,
}

pub fn forward(net: &NetworkSpec, input: &[f64]) -> Result<ActivationRecord, NnError> {
    let expected = net.layer_sizes[0];
    if input.len() != expected {
        return Err(NnError::InputLengthMismatch {
            expected,
            found: input.len(),
        });
    }
    let g = net.activation_function;
    let mut activations = vec![input.to_vec()];
    for (weights, biases) in net.weights.iter().zip(&net.biases) {
        let lower = activations.last().expect("input layer present");
        let mut sums = biases.clone();
        for (x, row) in lower.iter().zip(weights) {
            for (sum, w) in sums.iter_mut().zip(row) {
                *sum += w * x;
            }
        }
        activations.push(sums.into_iter().map(|s| g.apply(s)).collect());
    }
    let output_value = argmax(activations.last().expect("output layer present"));
    Ok(ActivationRecord {
        activations,
        output_value,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn neuron_name(layer: usize, position: usize) -> String {
    format!("n_{layer}_{position}")
}

pub fn weight_name(layer: usize, i: usize, j: usize) -> String {
    format!("w_{layer}_{i}_{j}")
}

pub fn bias_name(layer: usize, j: usize) -> String {
    format!("b_{layer}_{j}")
}

fn templates() -> [RelationTemplate; 3] {
    [
        RelationTemplate {
            name: NEURON_TO_NEURON.into(),
            explanan_type: TypeRef::new(NEURON, &["activation"]),
            explanandum_type: TypeRef::new(NEURON, &["activation"]),
            reason: "This lower layer neuron's activation participated in the computation of the questioned activation".into(),
            priority: 0,
        },
        RelationTemplate {
            name: PARAMETER_TO_NEURON.into(),
            explanan_type: TypeRef::new(PARAMETER, &["value"]),
            explanandum_type: TypeRef::new(NEURON, &["activation"]),
            reason: "This parameter value participated in the computation of the questioned activation".into(),
            priority: 0,
        },
        RelationTemplate {
            name: OUTPUT_NEURON_TO_OUTPUT.into(),
            explanan_type: TypeRef::new(NEURON, &["activation"]),
            explanandum_type: TypeRef::new(OUTPUT_ANSWER, &["value"]),
            reason: "This output neuron's activation was compared to decide the network's answer".into(),
            priority: 0,
        },
    ]
}

fn activation_model(layer: usize, j: usize, g: ActivationFunction) -> Model {
    let upper = (layer + 1) as i64;
    Model {
        name: "Neuron activation".into(),
        context: vec![
            AttributePattern::new(NEURON)
                .literal("layer", upper)
                .literal("position", j as i64)
                .with("activation", Condition::Unset),
            AttributePattern::new(NEURON)
                .literal("layer", layer as i64)
                .with("position", Condition::Free)
                .with("activation", Condition::Free),
            AttributePattern::new(PARAMETER)
                .literal("layer", layer as i64)
                .literal("j", j as i64)
                .with("i", Condition::Free)
                .with("value", Condition::Free),
        ],
        result: vec![AttributePattern::new(NEURON)
            .literal("layer", upper)
            .literal("position", j as i64)
            .with("activation", Condition::Modified)],
        model_of: ModelOf::new(NEURON, "activation"),
        story: format!(
            "x_{{{j}}}^{{{upper}}} = g(Σ_i w_{{i,{j}}}^{{{layer}}} · x_{{i}}^{{{layer}}} + b_{{{j}}}^{{{layer}}}), g = {}",
            g.name()
        ),
    }
}

fn output_model(last_layer: usize) -> Model {
    Model {
        name: "Output generation".into(),
        context: vec![
            AttributePattern::new(NEURON)
                .literal("layer", last_layer as i64)
                .with("position", Condition::Free)
                .with("activation", Condition::Free),
            AttributePattern::new(OUTPUT_ANSWER).with("value", Condition::Unset),
        ],
        result: vec![AttributePattern::new(OUTPUT_ANSWER).with("value", Condition::Modified)],
        model_of: ModelOf::new(OUTPUT_ANSWER, "value"),
        story: format!("output = argmax({{x_i^{{{last_layer}}} ∀ i}})"),
    }
}

fn check_record(net: &NetworkSpec, record: &ActivationRecord) -> Result<(), NnError> {
    net.validate()
        .map_err(|e| NnError::RecordMismatch(e.to_string()))?;
    if record.activations.len() != net.layer_sizes.len() {
        return Err(NnError::RecordMismatch(format!(
            "{} activation layers for a {}-layer network",
            record.activations.len(),
            net.layer_sizes.len()
        )));
    }
    for (l, (layer, &size)) in record.activations.iter().zip(&net.layer_sizes).enumerate() {
        if layer.len() != size {
            return Err(NnError::RecordMismatch(format!(
                "layer {l} has {} activations, expected {size}",
                layer.len()
            )));
        }
    }
    let outputs = net.layer_sizes[net.layer_sizes.len() - 1];
    if record.output_value >= outputs {
        return Err(NnError::RecordMismatch(format!(
            "output value {} outside [0, {outputs})",
            record.output_value
        )));
    }
    Ok(())
}

/// Builds the mental model of one prediction. The `OutputAnswer` entity is
/// the root output.
pub fn build_mental_model(
    net: &NetworkSpec,
    record: &ActivationRecord,
) -> Result<MentalModel, NnError> {
    check_record(net, record)?;
    let sizes = &net.layer_sizes;
    let last = sizes.len() - 1;

    let mut b = MentalModelBuilder::new();
    let neuron = b
        .define_kind(
            NEURON,
            BTreeMap::new(),
            attrs([
                ("activation", ValueType::Real),
                ("layer", ValueType::Integer),
                ("position", ValueType::Integer),
            ]),
        )
        .expect("fresh kind");
    let parameter = b
        .define_kind(
            PARAMETER,
            BTreeMap::new(),
            attrs([
                ("value", ValueType::Real),
                ("layer", ValueType::Integer),
                ("i", ValueType::Integer),
                ("j", ValueType::Integer),
            ]),
        )
        .expect("fresh kind");
    let output_kind = b
        .define_kind(OUTPUT_ANSWER, BTreeMap::new(), attrs([("value", ValueType::Integer)]))
        .expect("fresh kind");

    let neurons: Vec<Vec<EntityId>> = record
        .activations
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            layer
                .iter()
                .enumerate()
                .map(|(p, &x)| {
                    b.instantiate_entity(
                        neuron,
                        &neuron_name(l, p),
                        attrs([
                            ("activation", Value::Real(x)),
                            ("layer", Value::Integer(l as i64)),
                            ("position", Value::Integer(p as i64)),
                        ]),
                    )
                    .expect("neuron attributes match the kind")
                })
                .collect()
        })
        .collect();

    let add_parameter = |b: &mut MentalModelBuilder, name: &str, value: f64, l: usize, i: i64, j: usize| {
        b.instantiate_entity(
            parameter,
            name,
            attrs([
                ("value", Value::Real(value)),
                ("layer", Value::Integer(l as i64)),
                ("i", Value::Integer(i)),
                ("j", Value::Integer(j as i64)),
            ]),
        )
        .expect("parameter attributes match the kind")
    };
    // weights[l][i][j] and biases[l][j] entity ids
    let mut weight_ids: Vec<Vec<Vec<EntityId>>> = Vec::with_capacity(last);
    let mut bias_ids: Vec<Vec<EntityId>> = Vec::with_capacity(last);
    for l in 0..last {
        weight_ids.push(
            net.weights[l]
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &w)| add_parameter(&mut b, &weight_name(l, i, j), w, l, i as i64, j))
                        .collect()
                })
                .collect(),
        );
        bias_ids.push(
            net.biases[l]
                .iter()
                .enumerate()
                .map(|(j, &bias)| add_parameter(&mut b, &bias_name(l, j), bias, l, BIAS_SENTINEL, j))
                .collect(),
        );
    }
    let output = b
        .instantiate_entity(
            output_kind,
            "output",
            attrs([("value", Value::Integer(record.output_value as i64))]),
        )
        .expect("output attributes match the kind");

    let [n2n, p2n, o2o] = templates().map(|t| {
        b.define_relation_template(t).expect("fixed templates are valid")
    });
    for l in 0..last {
        for j in 0..sizes[l + 1] {
            let target = neurons[l + 1][j];
            for &lower in &neurons[l] {
                b.add_relation(n2n, lower, target).expect("neuron kinds");
            }
            for row in &weight_ids[l] {
                b.add_relation(p2n, row[j], target).expect("parameter kinds");
            }
            b.add_relation(p2n, bias_ids[l][j], target).expect("parameter kinds");
        }
    }
    for &n in &neurons[last] {
        b.add_relation(o2o, n, output).expect("output kinds");
    }

    for l in 0..last {
        for j in 0..sizes[l + 1] {
            b.add_model(activation_model(l, j, net.activation_function))
                .expect("activation model is valid");
        }
    }
    b.add_model(output_model(last)).expect("output model is valid");
    b.set_root_output(output).expect("output entity exists");
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(weights0: Vec<Vec<f64>>, g: ActivationFunction) -> NetworkSpec {
        NetworkSpec {
            layer_sizes: vec![2, 2, 1],
            activation_function: g,
            weights: vec![weights0, vec![vec![1.0], vec![1.0]]],
            biases: vec![vec![0.0, 0.0], vec![0.0]],
        }
    }

    #[test]
    fn zero_network_saturates_at_half() {
        let mut net = NetworkSpec::random(&[4, 3, 5], ActivationFunction::Sigmoid, 1);
        net.weights.iter_mut().flatten().flatten().for_each(|w| *w = 0.0);
        net.biases.iter_mut().flatten().for_each(|b| *b = 0.0);
        let rec = forward(&net, &[0.3, -1.0, 2.0, 7.0]).unwrap();
        assert!(rec.activations[1..].iter().flatten().all(|&x| x == 0.5));
        assert_eq!(rec.output_value, 0);
    }

    #[test]
    fn identity_relu_layer() {
        let net = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ActivationFunction::Relu);
        let rec = forward(&net, &[3.0, -2.0]).unwrap();
        assert_eq!(rec.activations[1], vec![3.0, 0.0]);
        assert_eq!(rec.activations[2], vec![3.0]);
    }

    #[test]
    fn mnist_shaped_forward() {
        let net = NetworkSpec::random(&MNIST_LAYERS, ActivationFunction::Sigmoid, 7);
        let rec = forward(&net, &vec![0.5; 784]).unwrap();
        assert_eq!(rec.activations[2].len(), 10);
        assert!(rec.output_value < 10);
    }

    #[test]
    fn input_length_is_checked() {
        let net = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ActivationFunction::Relu);
        assert_eq!(
            forward(&net, &[1.0]),
            Err(NnError::InputLengthMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn load_toy_network() {
        let text = r#"{"layer_sizes":[2,2,1],"activation":"relu",
            "weights":[[[1,0],[0,1]],[[1],[1]]],"biases":[[0,0],[0]]}"#;
        let net = load_network(text).unwrap();
        assert_eq!(net.activation_function, ActivationFunction::Relu);
        let bad = text.replace("[[0,0],[0]]", "[[0,0,0],[0]]");
        assert!(matches!(load_network(&bad), Err(NnError::ShapeMismatch(_))));
        assert!(matches!(load_network("{\"layer_sizes\":"), Err(NnError::MalformedDocument(_))));
    }

    #[test]
    fn seeded_networks_are_reproducible() {
        let a = NetworkSpec::random(&[3, 2], ActivationFunction::Tanh, 9);
        let b = NetworkSpec::random(&[3, 2], ActivationFunction::Tanh, 9);
        assert_eq!(a, b);
        assert!(a.weights.iter().flatten().flatten().all(|w| (-1.0..1.0).contains(w)));
        assert_eq!(a.parameter_count(), 8);
    }

    #[test]
    fn inputs_from_json_or_csv() {
        assert_eq!(load_input("[1, 2.5]").unwrap(), vec![1.0, 2.5]);
        assert_eq!(load_input("1, 2.5\n").unwrap(), vec![1.0, 2.5]);
        assert!(load_input("1,2\n3,4").is_err());
        assert!(load_input("1,x").is_err());
    }

    #[test]
    fn toy_mental_model_counts() {
        let net = NetworkSpec::random(&[2, 2, 1], ActivationFunction::Sigmoid, 3);
        let rec = forward(&net, &[0.1, 0.9]).unwrap();
        let mm = build_mental_model(&net, &rec).unwrap();
        let count = |kind: &str| {
            let k = mm.kind_id(kind).unwrap();
            mm.entities().iter().filter(|e| e.kind == k).count()
        };
        assert_eq!((count(NEURON), count(PARAMETER), count(OUTPUT_ANSWER)), (5, 9, 1));
        assert_eq!(mm.relations().len(), 6 + 9 + 1);
        assert_eq!(mm.models().len(), 3 + 1);
        assert_eq!(mm.models_of(NEURON, "activation").len(), 3);
        for e in mm.entities().iter().filter(|e| e.kind == mm.kind_id(NEURON).unwrap()) {
            let l = e.attributes["layer"].as_i64().unwrap() as usize;
            let p = e.attributes["position"].as_i64().unwrap() as usize;
            assert_eq!(e.attributes["activation"], Value::Real(rec.activations[l][p]));
        }
    }

    #[test]
    fn record_must_fit_network() {
        let net = NetworkSpec::random(&[2, 2, 1], ActivationFunction::Sigmoid, 3);
        let mut rec = forward(&net, &[0.1, 0.9]).unwrap();
        rec.output_value = 4;
        assert!(matches!(build_mental_model(&net, &rec), Err(NnError::RecordMismatch(_))));
        rec.output_value = 0;
        rec.activations.pop();
        assert!(matches!(build_mental_model(&net, &rec), Err(NnError::RecordMismatch(_))));
    }
}
